//! One function per subcommand. Each validates its keys, calls the library
//! and returns a serializable document.

use serde::{Deserialize, Serialize};

use ising_rg_core::dynamics::{
    analytic_spectrum, build_transfer_determined, exact_ring_evolve, gibbs_initial_distribution,
    matrix_power_deviation, mc_simulate, power_horizon, spectrum_check, DynamicsParams, Estimate,
    EvolvePoint, McConfig, McInit, McPoint, ObservableSpec, ObservableValues, RingDistribution,
    Schedule, DEFAULT_BUDGET, MAX_EXACT_SITES,
};
use ising_rg_core::rgflow::{
    correlation_remainder, decay_rate_fit, observable_remainders, rg_trajectory, RemainderSeries,
};
use ising_rg_core::transfer::{
    boundary_limit_observables, correlation_two_point, finite_open_chain_observable,
    finite_ring_observable, fixed_boundary_partition, free_energy_density, transfer_spectrum,
    two_point_observable, BoundaryLimitSet, ObservableFn, BOUNDARIES,
};

use crate::config::{boundary_label, parse_boundary, RunConfig};
use crate::error::{config_err, CliError, CliResult};

pub const BUDGET_ENV: &str = "ISING_RG_BUDGET";
pub const MAX_RG_STEPS: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    Correlation,
    Observable,
    RgFlow,
    Spectrum,
    Evolve,
    Simulate,
    FreeEnergy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Document {
    Correlation(CorrelationDoc),
    Observable(ObservableDoc),
    RgFlow(RgFlowDoc),
    Spectrum(SpectrumDoc),
    Evolve(EvolveDoc),
    Simulate(SimulateDoc),
    FreeEnergy(FreeEnergyDoc),
}

impl Document {
    /// False when the run carried a check and that check failed.
    pub fn passed(&self) -> bool {
        match self {
            Document::Observable(d) => d.oracle.as_ref().is_none_or(|o| o.pass),
            Document::Simulate(d) => d.verdict == Verdict::Pass,
            _ => true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationRow {
    pub k: f64,
    pub h: f64,
    pub d: u32,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationDoc {
    pub rows: Vec<CorrelationRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleCheck {
    pub n_sites: usize,
    pub s_hat: f64,
    pub s_tilde: f64,
    pub s: f64,
    pub max_gap: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservableDoc {
    pub k: f64,
    pub f2: ObservableFn,
    pub g2: ObservableFn,
    /// `periodic` or a pair like `+-`.
    pub boundary: String,
    /// Site separation for the periodic chain, otherwise `j − i`.
    pub d: usize,
    pub i: Option<usize>,
    pub j: Option<usize>,
    pub s_hat: f64,
    pub s_tilde: f64,
    pub s: f64,
    /// Every boundary at once; present for fixed boundaries.
    pub limits: Option<BoundaryLimitSet>,
    pub oracle: Option<OracleCheck>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RgRow {
    pub n: usize,
    pub k_n: f64,
    pub s_n: f64,
    pub o_hat: f64,
    pub o_tilde: f64,
    pub o: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayRates {
    pub s_n: Option<f64>,
    pub o_hat: Option<f64>,
    pub o_tilde: Option<f64>,
    pub o: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RgFlowDoc {
    pub k0: f64,
    pub x1: i64,
    pub x2: i64,
    pub fit_from: usize,
    pub rows: Vec<RgRow>,
    /// Least-squares log-slopes; absent when the tail is identically zero.
    pub rates: DecayRates,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumDoc {
    pub gamma: f64,
    pub noise_scale: f64,
    pub m: usize,
    pub r: f64,
    pub eigenvalues: Vec<f64>,
    pub epsilon: f64,
    pub horizon: usize,
    pub deviation_at_horizon: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolveRow {
    #[serde(flatten)]
    pub point: EvolvePoint,
    /// Distance of the headline value from the limit.
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolveDoc {
    pub params: DynamicsParams,
    pub schedule: Schedule,
    pub n_sites: usize,
    pub steps: usize,
    pub sites: Vec<usize>,
    pub observable: ObservableSpec,
    pub init: String,
    pub rows: Vec<EvolveRow>,
    pub limit: ObservableValues,
    pub final_gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRow {
    pub name: String,
    pub estimate: Estimate,
    pub reference: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateDoc {
    pub params: DynamicsParams,
    pub schedule: Schedule,
    pub config: McConfig,
    pub rows: Vec<McPoint>,
    pub limit: ObservableValues,
    pub sigmas: f64,
    pub checks: Vec<CheckRow>,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryFreeEnergy {
    pub boundary: String,
    /// `ln Z / (N+1)`, per bond of the open chain.
    pub log_z_per_bond: f64,
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FreeEnergyDoc {
    pub k: f64,
    pub n_sites: usize,
    pub free_energy: f64,
    pub boundaries: Vec<BoundaryFreeEnergy>,
}

pub fn run_command(cmd: Command, cfg: &RunConfig) -> CliResult<Document> {
    match cmd {
        Command::Correlation => cmd_correlation(cfg).map(Document::Correlation),
        Command::Observable => cmd_observable(cfg).map(Document::Observable),
        Command::RgFlow => cmd_rg_flow(cfg).map(Document::RgFlow),
        Command::Spectrum => cmd_spectrum(cfg).map(Document::Spectrum),
        Command::Evolve => cmd_evolve(cfg).map(Document::Evolve),
        Command::Simulate => cmd_simulate(cfg).map(Document::Simulate),
        Command::FreeEnergy => cmd_free_energy(cfg).map(Document::FreeEnergy),
    }
}

pub fn cmd_correlation(cfg: &RunConfig) -> CliResult<CorrelationDoc> {
    let c = cfg.coupling()?;
    let d_max = cfg.usize_or("d_max", 5)?;
    let d_max = u32::try_from(d_max).map_err(|_| config_err("d_max is too large"))?;
    let rows = (0..=d_max)
        .map(|d| CorrelationRow {
            k: c.k,
            h: c.h,
            d,
            value: correlation_two_point(&c, d),
        })
        .collect();
    Ok(CorrelationDoc { rows })
}

pub fn cmd_observable(cfg: &RunConfig) -> CliResult<ObservableDoc> {
    let c = cfg.coupling()?;
    let f = cfg.observable_fn("f2")?;
    let g = cfg.observable_fn("g2")?;
    let oracle_n = cfg.opt_usize("oracle")?;
    let r = transfer_spectrum(&c).ratio.abs();
    let gap_of = |a: (f64, f64, f64), b: (f64, f64, f64)| {
        (a.0 - b.0)
            .abs()
            .max((a.1 - b.1).abs())
            .max((a.2 - b.2).abs())
    };

    match parse_boundary(cfg.raw("boundary").unwrap_or("periodic"))? {
        None => {
            let d = cfg.usize_or("d", 3)?;
            let d32 = u32::try_from(d).map_err(|_| config_err("d is too large"))?;
            let v = two_point_observable(&c, &f, &g, d32)?;
            let oracle = oracle_n
                .map(|n| -> CliResult<OracleCheck> {
                    if d == 0 || d >= n {
                        return Err(config_err(format!(
                            "oracle ring of {n} sites cannot hold distance {d}"
                        )));
                    }
                    let o = finite_ring_observable(&c, &f, &g, 1, 1 + d, n)?;
                    let max_gap = gap_of((v.s_hat, v.s_tilde, v.s), (o.s_hat, o.s_tilde, o.s));
                    // finite-ring corrections are of order r^{N−d}
                    let tolerance = 5.0 * r.powi((n - d) as i32) + 1e-12;
                    Ok(OracleCheck {
                        n_sites: n,
                        s_hat: o.s_hat,
                        s_tilde: o.s_tilde,
                        s: o.s,
                        max_gap,
                        tolerance,
                        pass: max_gap <= tolerance,
                    })
                })
                .transpose()?;
            Ok(ObservableDoc {
                k: c.k,
                f2: f,
                g2: g,
                boundary: "periodic".into(),
                d,
                i: None,
                j: None,
                s_hat: v.s_hat,
                s_tilde: v.s_tilde,
                s: v.s,
                limits: None,
                oracle,
            })
        }
        Some((s0, s1)) => {
            let i = cfg.usize_or("i", 2)?;
            let j = cfg.usize_or("j", 5)?;
            let limits = boundary_limit_observables(&c, &f, &g, i, j)?;
            let idx = BOUNDARIES
                .iter()
                .position(|b| *b == (s0, s1))
                .expect("all four pairs listed");
            let (s_hat, s_tilde) = (limits.s_hat[idx], limits.s_tilde[idx]);
            let oracle = oracle_n
                .map(|n| -> CliResult<OracleCheck> {
                    if j >= n {
                        return Err(config_err(format!(
                            "oracle chain of {n} sites cannot hold site {j}"
                        )));
                    }
                    let o = finite_open_chain_observable(&c, &f, &g, i, j, n, s0, s1)?;
                    let max_gap =
                        gap_of((s_hat, s_tilde, s_hat - s_tilde), (o.s_hat, o.s_tilde, o.s));
                    // the far boundary sits N+1−j bonds beyond the second site
                    let tolerance = 5.0 * r.powi((n + 1 - j) as i32) + 1e-12;
                    Ok(OracleCheck {
                        n_sites: n,
                        s_hat: o.s_hat,
                        s_tilde: o.s_tilde,
                        s: o.s,
                        max_gap,
                        tolerance,
                        pass: max_gap <= tolerance,
                    })
                })
                .transpose()?;
            Ok(ObservableDoc {
                k: c.k,
                f2: f,
                g2: g,
                boundary: boundary_label(s0, s1),
                d: j - i,
                i: Some(i),
                j: Some(j),
                s_hat,
                s_tilde,
                s: s_hat - s_tilde,
                limits: Some(limits),
                oracle,
            })
        }
    }
}

pub fn cmd_rg_flow(cfg: &RunConfig) -> CliResult<RgFlowDoc> {
    let k0 = cfg.f64_or("k", 1.0)?;
    let n = cfg.usize_or("n", 12)?;
    if n > MAX_RG_STEPS {
        return Err(config_err(format!(
            "n must be at most {MAX_RG_STEPS}, got {n}"
        )));
    }
    let x1 = cfg.i64_or("x1", 0)?;
    let x2 = cfg.i64_or("x2", 1)?;
    let fit_from = cfg.usize_or("from", 4)?;
    let f = cfg.observable_fn("f2")?;
    let g = cfg.observable_fn("g2")?;
    let traj = rg_trajectory(k0, n)?;
    let corr = correlation_remainder(k0, x1, x2, n)?;
    let (hat, tilde, total) = observable_remainders(k0, &f, &g, x1, x2, n)?;
    let rows = (0..=n)
        .map(|m| RgRow {
            n: m,
            k_n: traj.k_values[m],
            s_n: corr.values[m],
            o_hat: hat.values[m],
            o_tilde: tilde.values[m],
            o: total.values[m],
        })
        .collect();
    // an all-zero tail has no slope, which is reported as absent
    let fit = |s: &RemainderSeries| decay_rate_fit(s, fit_from).ok();
    Ok(RgFlowDoc {
        k0,
        x1,
        x2,
        fit_from,
        rows,
        rates: DecayRates {
            s_n: fit(&corr),
            o_hat: fit(&hat),
            o_tilde: fit(&tilde),
            o: fit(&total),
        },
    })
}

fn dynamics_params(cfg: &RunConfig) -> CliResult<DynamicsParams> {
    Ok(DynamicsParams::new(
        cfg.f64_or("gamma", 0.0)?,
        cfg.f64_or("noise_scale", 1.0)?,
    )?)
}

pub fn cmd_spectrum(cfg: &RunConfig) -> CliResult<SpectrumDoc> {
    let params = dynamics_params(cfg)?;
    let m = cfg.usize_or("m", 2)?;
    let epsilon = cfg.f64_or("epsilon", 1e-10)?;
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(config_err("epsilon must lie in (0,1)"));
    }
    let mat = build_transfer_determined(&params, m)?;
    let eigenvalues = spectrum_check(&mat)?;
    let r = analytic_spectrum(mat.x, 1)[1];
    let horizon = power_horizon(r, epsilon);
    let deviation_at_horizon = matrix_power_deviation(&mat, horizon);
    Ok(SpectrumDoc {
        gamma: params.gamma,
        noise_scale: params.noise_scale,
        m,
        r,
        eigenvalues,
        epsilon,
        horizon,
        deviation_at_horizon,
    })
}

fn headline(v: &ObservableValues) -> f64 {
    match *v {
        ObservableValues::Pair { s, .. } => s,
        ObservableValues::Table { value } => value,
    }
}

/// `gibbs` (at the schedule's first coupling), `gibbs:K` or `all_up`.
fn parse_init(text: &str, schedule: &Schedule) -> CliResult<McInit> {
    match text.split_once(':') {
        None if text == "gibbs" => Ok(McInit::Gibbs {
            k: schedule.initial(),
        }),
        None if text == "all_up" => Ok(McInit::AllUp),
        Some(("gibbs", k)) => {
            let k: f64 = k
                .trim()
                .parse()
                .map_err(|e| config_err(format!("init {text:?}: {e}")))?;
            Ok(McInit::Gibbs { k })
        }
        _ => Err(config_err(format!(
            "init must be gibbs, gibbs:K or all_up, got {text:?}"
        ))),
    }
}

fn init_label(init: &McInit) -> String {
    match init {
        McInit::Gibbs { k } => format!("gibbs:{k}"),
        McInit::AllUp => "all_up".into(),
        McInit::Distribution { .. } => "distribution".into(),
    }
}

pub fn cmd_evolve(cfg: &RunConfig) -> CliResult<EvolveDoc> {
    let params = dynamics_params(cfg)?;
    let schedule = cfg.schedule()?;
    let n_sites = cfg.usize_or("n_sites", 10)?;
    if n_sites > MAX_EXACT_SITES {
        return Err(ising_rg_core::Error::Resource(format!(
            "exact evolution holds 2^N probabilities; N = {n_sites} exceeds {MAX_EXACT_SITES}"
        ))
        .into());
    }
    let steps = cfg.usize_or("steps", 60)?;
    if steps == 0 {
        return Err(config_err("steps must be >= 1"));
    }
    let sites = cfg.list_usize("sites", &[1, 4])?;
    let observable = cfg.observable_spec()?;
    let init = parse_init(cfg.raw("init").unwrap_or("gibbs"), &schedule)?;
    let dist = match &init {
        McInit::Gibbs { k } => gibbs_initial_distribution(*k, n_sites)?,
        McInit::AllUp => RingDistribution::point_mass(n_sites, 0)?,
        McInit::Distribution { dist } => dist.clone(),
    };
    let limit = observable.limit()?;
    let points = exact_ring_evolve(&params, &schedule, &dist, steps, &sites, &observable)?;
    let rows: Vec<EvolveRow> = points
        .into_iter()
        .map(|point| {
            let gap = (headline(&point.values) - headline(&limit)).abs();
            EvolveRow { point, gap }
        })
        .collect();
    let final_gap = rows.last().expect("at least one step").gap;
    Ok(EvolveDoc {
        params,
        schedule,
        n_sites,
        steps,
        sites,
        observable,
        init: init_label(&init),
        rows,
        limit,
        final_gap,
    })
}

fn budget() -> CliResult<u64> {
    match std::env::var(BUDGET_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|e| config_err(format!("{BUDGET_ENV} = {v:?}: {e}"))),
        Err(_) => Ok(DEFAULT_BUDGET),
    }
}

pub fn cmd_simulate(cfg: &RunConfig) -> CliResult<SimulateDoc> {
    let params = dynamics_params(cfg)?;
    let schedule = cfg.schedule()?;
    let sigmas = cfg.f64_or("sigmas", 3.0)?;
    if sigmas <= 0.0 {
        return Err(config_err("sigmas must be > 0"));
    }
    let config = McConfig {
        n_sites: cfg.usize_or("n_sites", 256)?,
        steps: cfg.usize_or("steps", 60)?,
        replicas: cfg.usize_or("replicas", 1000)?,
        seed: cfg.u64_or("seed", 0)?,
        sites: cfg.list_usize("sites", &[1, 4])?,
        observable: cfg.observable_spec()?,
        init: parse_init(cfg.raw("init").unwrap_or("gibbs"), &schedule)?,
        budget: budget()?,
    };
    if config.steps == 0 {
        return Err(config_err("steps must be >= 1"));
    }
    let res = mc_simulate(&params, &schedule, &config)?;
    let checks: Vec<CheckRow> = res
        .final_checks()
        .into_iter()
        .map(|(name, estimate, reference)| CheckRow {
            name: name.to_string(),
            estimate,
            reference,
            pass: estimate.within(reference, sigmas),
        })
        .collect();
    let verdict = if !checks.is_empty() && checks.iter().all(|c| c.pass) {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok(SimulateDoc {
        params,
        schedule,
        config,
        rows: res.points,
        limit: res.limit,
        sigmas,
        checks,
        verdict,
    })
}

pub fn cmd_free_energy(cfg: &RunConfig) -> CliResult<FreeEnergyDoc> {
    let c = cfg.coupling()?;
    let n_sites = cfg.usize_or("n_sites", 30)?;
    let free_energy = free_energy_density(&c)?;
    let boundaries = BOUNDARIES
        .iter()
        .map(|&(s0, s1)| -> Result<_, CliError> {
            let z = fixed_boundary_partition(&c, n_sites, s0, s1)?;
            let log_z_per_bond = z.ln() / (n_sites + 1) as f64;
            if !log_z_per_bond.is_finite() {
                return Err(ising_rg_core::Error::Numeric(format!(
                    "ln Z overflowed for boundary {}",
                    boundary_label(s0, s1)
                ))
                .into());
            }
            Ok(BoundaryFreeEnergy {
                boundary: boundary_label(s0, s1),
                log_z_per_bond,
                gap: (log_z_per_bond - free_energy).abs(),
            })
        })
        .collect::<Result<_, _>>()?;
    Ok(FreeEnergyDoc {
        k: c.k,
        n_sites,
        free_energy,
        boundaries,
    })
}
