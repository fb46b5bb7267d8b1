//! End-to-end construction of a tight Hamiltonian cycle: reservoir, absorbing
//! path, long path, two connections through the reservoir, absorption.

use std::collections::BTreeMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::absorption::{build_absorbing_path, AbsorbingParams, AbsorbingPath, Selection};
use crate::bitset::VertexSet;
use crate::connector::{connect_through_reservoir, sample_reservoir, ConnectMode, ConnectorParams, Reservoir};
use crate::cover::{build_long_path, CoverParams, LongPath, LongPathParams};
use crate::hypergraph::{check_posa_condition, is_hamiltonian_cycle, Hypergraph3, TightCycle, TightPath, Vertex};
use crate::oracle::{find_tight_hamiltonian_cycle, CycleVerdict, SearchBudget};
use crate::splice::insert_into_cycle;
use crate::sub_seed;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PipelineError {
    #[error("the report carries no certificate")]
    NoCertificate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Params,
    Reservoir,
    AbsorbingPath,
    LongPath,
    Connect,
    Absorb,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StageBudgets {
    /// Node budget of every connecting-path search.
    pub connect: SearchBudget,
    /// Node budget of every absorber wiring search.
    pub wiring: SearchBudget,
    pub oracle: SearchBudget,
}

impl Default for StageBudgets {
    fn default() -> Self {
        StageBudgets {
            connect: SearchBudget::nodes(2_000_000),
            wiring: SearchBudget::nodes(2_000_000),
            oracle: SearchBudget::nodes(50_000_000),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineParams {
    pub alpha: f64,
    pub theta: f64,
    #[serde(rename = "L")]
    pub length: usize,
    pub s: usize,
    pub target_capacity: usize,
    pub seed: u64,
    pub budgets: StageBudgets,
    pub fallback_to_oracle: bool,
    /// Largest n for which the oracle fallback runs.
    pub oracle_max_n: usize,
    /// Accept an absorbing path below the target capacity.
    pub allow_partial: bool,
    /// Insert leftover vertices that no free absorber takes directly into
    /// the cycle instead of failing.
    pub insert_overflow: bool,
    pub connect_mode: ConnectMode,
    pub cover: CoverParams,
}

impl PipelineParams {
    pub fn new(alpha: f64, theta: f64, length: usize, s: usize, target_capacity: usize, seed: u64) -> Self {
        PipelineParams {
            alpha,
            theta,
            length,
            s,
            target_capacity,
            seed,
            budgets: StageBudgets::default(),
            fallback_to_oracle: true,
            oracle_max_n: 12,
            allow_partial: false,
            insert_overflow: true,
            connect_mode: ConnectMode::Plain,
            cover: CoverParams::default(),
        }
    }

    /// Checks `s` even and at least 4, `L >= 3`, `theta^2 n >= 8`.
    pub fn validate(&self, n: usize) -> Result<(), String> {
        if !(self.alpha > 0.0 && self.alpha < 0.5) {
            return Err(format!("alpha must lie in (0, 1/2), got {}", self.alpha));
        }
        if !(self.theta > 0.0 && self.theta < 1.0) {
            return Err(format!("theta must lie in (0, 1), got {}", self.theta));
        }
        if self.s < 4 || !self.s.is_multiple_of(2) {
            return Err(format!("s must be even and >= 4, got {}", self.s));
        }
        if self.length < 3 {
            return Err(format!("L must be >= 3, got {}", self.length));
        }
        let r = self.theta * self.theta * n as f64;
        if r < 8.0 - 1e-9 {
            return Err(format!("theta^2 n = {r:.3} < 8"));
        }
        self.cover.validate().map_err(|e| e.to_string())
    }

    fn connector(&self, stream: u64) -> ConnectorParams {
        let mut c = ConnectorParams::new(self.alpha, self.length, sub_seed(self.seed, stream));
        c.budget = self.budgets.connect;
        c.mode = self.connect_mode;
        c
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageOutcome {
    pub stage: Stage,
    pub ok: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbsorbingSummary {
    pub vertices: usize,
    pub blocks: usize,
    pub min_capacity: usize,
    pub complete: bool,
    pub path: TightPath,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleFallback {
    pub verdict: CycleVerdict,
    pub nodes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub n: usize,
    pub params: PipelineParams,
    pub posa_holds: bool,
    pub success: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failed_stage: Option<Stage>,
    pub stages: Vec<StageOutcome>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reservoir: Option<Reservoir>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub absorbing_path: Option<AbsorbingSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub long_path: Option<LongPath>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p1: Option<TightPath>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p2: Option<TightPath>,
    /// Vertices off the cycle before absorption.
    pub leftover: Vec<Vertex>,
    /// Leftover vertices taken in by an absorber.
    pub absorbed: Vec<Vertex>,
    /// Leftover vertices inserted directly into the cycle.
    pub inserted: Vec<Vertex>,
    /// Reservoir vertices on the final cycle outside the absorbing path.
    pub reservoir_used: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<TightCycle>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleFallback>,
    /// Seconds per stage; excluded from reproducibility comparisons.
    pub timing: BTreeMap<String, f64>,
}

impl RunReport {
    /// The report without its timing map.
    pub fn without_timing(&self) -> RunReport {
        RunReport {
            timing: BTreeMap::new(),
            ..self.clone()
        }
    }
}

struct Run<'a> {
    h: &'a Hypergraph3,
    report: RunReport,
    clock: Instant,
}

impl Run<'_> {
    fn pass(&mut self, stage: Stage) {
        self.tick(stage);
        self.report.stages.push(StageOutcome {
            stage,
            ok: true,
            error: None,
        });
    }

    fn fail(mut self, stage: Stage, error: impl ToString) -> RunReport {
        self.tick(stage);
        let error = error.to_string();
        log::info!("pipeline failed at {stage:?}: {error}");
        self.report.stages.push(StageOutcome {
            stage,
            ok: false,
            error: Some(error),
        });
        self.report.failed_stage = Some(stage);
        let p = &self.report.params;
        if p.fallback_to_oracle && self.h.n() <= p.oracle_max_n {
            match find_tight_hamiltonian_cycle(self.h, p.budgets.oracle) {
                Ok(s) => {
                    self.report.oracle = Some(OracleFallback {
                        verdict: s.verdict,
                        nodes: s.nodes,
                    })
                }
                Err(e) => log::warn!("oracle fallback unavailable: {e}"),
            }
            self.tick_named("oracle");
        }
        self.report
    }

    fn tick(&mut self, stage: Stage) {
        let name = serde_json::to_value(stage)
            .ok()
            .and_then(|v| v.as_str().map(str::to_string))
            .unwrap_or_default();
        self.tick_named(&name);
    }

    fn tick_named(&mut self, name: &str) {
        let now = Instant::now();
        self.report
            .timing
            .insert(name.to_string(), (now - self.clock).as_secs_f64());
        self.clock = now;
    }
}

/// Runs the full construction. Every stage failure is recorded in the
/// report; on success the certificate is a validated tight Hamiltonian
/// cycle in canonical form.
pub fn run_absorption_pipeline(h: &Hypergraph3, params: &PipelineParams) -> RunReport {
    let n = h.n();
    let mut run = Run {
        h,
        clock: Instant::now(),
        report: RunReport {
            n,
            params: params.clone(),
            posa_holds: false,
            success: false,
            failed_stage: None,
            stages: Vec::new(),
            reservoir: None,
            absorbing_path: None,
            long_path: None,
            p1: None,
            p2: None,
            leftover: Vec::new(),
            absorbed: Vec::new(),
            inserted: Vec::new(),
            reservoir_used: 0,
            certificate: None,
            oracle: None,
            timing: BTreeMap::new(),
        },
    };

    if let Err(e) = params.validate(n) {
        return run.fail(Stage::Params, e);
    }
    match check_posa_condition(h, params.alpha) {
        Ok(r) => {
            if !r.holds {
                log::warn!(
                    "degree condition fails for alpha = {} at {} pairs; continuing",
                    params.alpha,
                    r.violations.len()
                );
            }
            run.report.posa_holds = r.holds;
        }
        Err(e) => return run.fail(Stage::Params, e),
    }
    run.pass(Stage::Params);

    let reservoir = match sample_reservoir(h, params.theta, params.length, &params.connector(1)) {
        Ok(r) => r,
        Err(e) => return run.fail(Stage::Reservoir, e),
    };
    let verified = reservoir.verified;
    let failed = reservoir.failed_probes.len();
    run.report.reservoir = Some(reservoir.clone());
    if !verified {
        return run.fail(Stage::Reservoir, format!("{failed} verification probes failed"));
    }
    run.pass(Stage::Reservoir);
    let r_set = reservoir.member_set(n);

    let ap = AbsorbingParams {
        budget: params.budgets.wiring,
        allow_partial: params.allow_partial,
        selection: Selection::Greedy,
        ..AbsorbingParams::new(
            params.theta,
            params.alpha,
            params.s,
            params.length,
            params.target_capacity,
            sub_seed(params.seed, 2),
        )
    };
    let pa = match build_absorbing_path(h, &r_set, &ap) {
        Ok(pa) => pa,
        Err(e) => return run.fail(Stage::AbsorbingPath, e),
    };
    run.report.absorbing_path = Some(AbsorbingSummary {
        vertices: pa.path.vertex_count(),
        blocks: pa.registry.len(),
        min_capacity: pa.min_capacity(),
        complete: pa.complete,
        path: pa.path.clone(),
    });
    run.pass(Stage::AbsorbingPath);

    let lp_params = LongPathParams {
        cover: CoverParams {
            seed: sub_seed(params.seed, 3),
            ..params.cover
        },
        alpha: params.alpha,
        length: params.length,
        budget: params.budgets.connect,
        seed: sub_seed(params.seed, 4),
    };
    let lp = match build_long_path(h, &reservoir, &pa, &lp_params) {
        Ok(lp) => lp,
        Err(e) => return run.fail(Stage::LongPath, e),
    };
    run.report.long_path = Some(lp.clone());
    if lp.path.vertex_count() < 4 {
        return run.fail(Stage::LongPath, "long path has fewer than 4 vertices");
    }
    run.pass(Stage::LongPath);

    let (cycle, used_r) = match connect(h, &reservoir, &pa, &lp, params) {
        Ok((p1, p2, cycle, used)) => {
            run.report.p1 = Some(p1);
            run.report.p2 = Some(p2);
            (cycle, used)
        }
        Err(e) => return run.fail(Stage::Connect, e),
    };
    run.report.reservoir_used = used_r;
    run.pass(Stage::Connect);

    match absorb(h, &pa, cycle, params, &mut run.report) {
        Ok(c) => {
            run.report.certificate = Some(c);
            run.report.success = true;
            run.pass(Stage::Absorb);
            run.report
        }
        Err(e) => run.fail(Stage::Absorb, e),
    }
}

/// The cycle `Q P1 P_A P2` (internal vertices of the connections only) and
/// the number of reservoir vertices it uses.
fn connect(
    h: &Hypergraph3,
    r: &Reservoir,
    pa: &AbsorbingPath,
    lp: &LongPath,
    params: &PipelineParams,
) -> Result<(TightPath, TightPath, Vec<Vertex>, usize), String> {
    let n = h.n();
    let q = &lp.path;
    let mut used = VertexSet::from_iter_with(n, lp.reservoir_used.iter().copied());
    let p1 = connect_through_reservoir(h, q.end_pair(), pa.path.start_pair(), r, &used, &params.connector(5))
        .map_err(|e| format!("P1: {e}"))?;
    for &v in p1.internal() {
        used.insert(v);
    }
    let p2 = connect_through_reservoir(h, pa.path.end_pair(), q.start_pair(), r, &used, &params.connector(6))
        .map_err(|e| format!("P2: {e}"))?;
    for &v in p2.internal() {
        used.insert(v);
    }
    let mut cycle = q.vertices().to_vec();
    cycle.extend_from_slice(p1.internal());
    cycle.extend_from_slice(pa.path.vertices());
    cycle.extend_from_slice(p2.internal());
    Ok((p1, p2, cycle, used.len()))
}

/// Absorbs the vertices off `cycle` through the absorbing path (maximum
/// assignment of free absorbers), then inserts the rest directly when
/// allowed.
fn absorb(
    h: &Hypergraph3,
    pa: &AbsorbingPath,
    cycle: Vec<Vertex>,
    params: &PipelineParams,
    report: &mut RunReport,
) -> Result<TightCycle, String> {
    let n = h.n();
    let on = VertexSet::from_iter_with(n, cycle.iter().copied());
    let leftover: Vec<Vertex> = (1..=n).filter(|&v| !on.contains(v)).collect();
    report.leftover = leftover.clone();
    let (assignment, missing) = pa.assign_max(h, &leftover);
    if !missing.is_empty() && !params.insert_overflow {
        return Err(format!(
            "capacity_unreachable: {} of {} leftover vertices have no free absorber",
            missing.len(),
            leftover.len()
        ));
    }
    let swapped = pa.swap_blocks(&assignment);
    report.absorbed = assignment.iter().map(|&(x, _)| x).collect();
    report.absorbed.sort_unstable();

    let pa_len = pa.path.vertex_count();
    let start = cycle
        .iter()
        .position(|&v| v == pa.path.vertices()[0])
        .expect("absorbing path lies on the cycle");
    let mut c = Vec::with_capacity(n);
    c.extend_from_slice(&cycle[..start]);
    c.extend_from_slice(swapped.vertices());
    c.extend_from_slice(&cycle[start + pa_len..]);

    let mut pending = missing;
    loop {
        let before = pending.len();
        pending.retain(|&v| {
            if insert_into_cycle(h, &mut c, v) {
                report.inserted.push(v);
                false
            } else {
                true
            }
        });
        if pending.is_empty() || pending.len() == before {
            break;
        }
    }
    report.inserted.sort_unstable();
    if !pending.is_empty() {
        return Err(format!(
            "capacity_unreachable: {} leftover vertices could be neither absorbed nor inserted (first {})",
            pending.len(),
            pending[0]
        ));
    }
    let cycle = TightCycle::new(c).map_err(|e| e.to_string())?;
    if !is_hamiltonian_cycle(h, &cycle) {
        return Err("assembled cycle fails validation".into());
    }
    Ok(cycle.canonical())
}

/// True iff the certificate is a tight cycle of `h` through every vertex.
pub fn verify_certificate(h: &Hypergraph3, report: &RunReport) -> Result<bool, PipelineError> {
    let c = report.certificate.as_ref().ok_or(PipelineError::NoCertificate)?;
    Ok(is_hamiltonian_cycle(h, c))
}
