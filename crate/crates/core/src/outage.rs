//! Femto-UE outage probability.
//!
//! With unit-mean exponential fast fading `Z_0` on the desired link, the
//! outage probability conditional on the interference `I` is
//! `1 - exp(-γ I / S̄)`. [`estimate`] averages that expression over random
//! interferer fading (`p_out_closed`) and, on the same draws, counts
//! `S̄ Z_0 < γ I` directly (`p_out_mc`).
//!
//! Trials are split into a fixed number of shards, each with its own
//! ChaCha stream. Shards may run on any number of threads; results only
//! depend on the seed and the shard count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::channel::{db_to_linear, ChannelSample, LinkBudget, PropagationParams};
use crate::error::{Error, Result};
use crate::son::{assign_random_edges, assign_shared_edge, EdgeAssignment, SonCoordinator};
use crate::spectrum::{build_plan, Band, EdgeColor, FrequencyPlan, Scheme, UeRegion};
use crate::topology::{
    generate, neighbor_graph, Deployment, DeploymentParams, FapId, NeighborGraph, Point, Scenario,
};

pub fn gamma_linear(gamma_db: f64) -> f64 {
    db_to_linear(gamma_db)
}

fn check_inputs(s_bar: f64, gamma_linear: f64) -> Result<()> {
    if !(s_bar.is_finite() && s_bar > 0.0) {
        return Err(Error::NonPositiveSignal(s_bar));
    }
    if !(gamma_linear.is_finite() && gamma_linear > 0.0) {
        return Err(Error::InvalidOutageConfig(format!(
            "SIR threshold must be positive and finite, got {gamma_linear}"
        )));
    }
    Ok(())
}

fn check_interference(i: f64) -> Result<()> {
    if !(i.is_finite() && i >= 0.0) {
        return Err(Error::InvalidOutageConfig(format!(
            "interference must be finite and non-negative, got {i} W"
        )));
    }
    Ok(())
}

/// `P(S̄ Z_0 < γ I) = 1 - exp(-γ I / S̄)` for `Z_0 ~ Exp(1)`.
pub fn conditional_outage(s_bar: f64, total_interference: f64, gamma_linear: f64) -> Result<f64> {
    check_inputs(s_bar, gamma_linear)?;
    check_interference(total_interference)?;
    Ok(-(-gamma_linear * total_interference / s_bar).exp_m1())
}

/// Same quantity written as `1 - Π exp(-γ t_i / S̄)` over the individual
/// interference terms.
pub fn conditional_outage_product(s_bar: f64, terms: &[f64], gamma_linear: f64) -> Result<f64> {
    check_inputs(s_bar, gamma_linear)?;
    let mut survive = 1.0;
    for &t in terms {
        check_interference(t)?;
        survive *= (-gamma_linear * t / s_bar).exp();
    }
    Ok(1.0 - survive)
}

/// Direction from the serving FAP in which the UE is placed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum UePlacement {
    /// Toward the closest other FAP (worst case).
    #[default]
    TowardNearestNeighbor,
    /// Uniform angle, drawn from the estimate's seed.
    RandomDirection,
}

impl UePlacement {
    pub fn name(&self) -> &'static str {
        match self {
            UePlacement::TowardNearestNeighbor => "nearest",
            UePlacement::RandomDirection => "random",
        }
    }
}

impl std::fmt::Display for UePlacement {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for UePlacement {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "nearest" => Ok(UePlacement::TowardNearestNeighbor),
            "random" => Ok(UePlacement::RandomDirection),
            other => Err(Error::InvalidConfig(format!(
                "unknown UE placement {other:?}, expected nearest or random"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutageConfig {
    pub gamma_db: f64,
    pub n_trials: u64,
    /// UE to serving FAP, meters.
    pub ue_distance: f64,
    pub ue_region: UeRegion,
    pub placement: UePlacement,
    /// Number of independent RNG streams the trials are split over.
    pub shards: u32,
}

impl Default for OutageConfig {
    fn default() -> Self {
        Self {
            gamma_db: 9.0,
            n_trials: 100_000,
            ue_distance: 5.0,
            ue_region: UeRegion::Edge,
            placement: UePlacement::TowardNearestNeighbor,
            shards: 8,
        }
    }
}

impl OutageConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_trials == 0 {
            return Err(Error::InvalidOutageConfig(
                "n_trials must be at least 1".into(),
            ));
        }
        if !self.gamma_db.is_finite() {
            return Err(Error::InvalidOutageConfig(format!(
                "gamma must be finite, got {} dB",
                self.gamma_db
            )));
        }
        if !(self.ue_distance.is_finite() && self.ue_distance > 0.0) {
            return Err(Error::InvalidOutageConfig(format!(
                "UE distance must be positive, got {} m",
                self.ue_distance
            )));
        }
        if self.shards == 0 {
            return Err(Error::InvalidOutageConfig(
                "shards must be at least 1".into(),
            ));
        }
        Ok(())
    }

    pub fn gamma_linear(&self) -> f64 {
        gamma_linear(self.gamma_db)
    }
}

/// Running sums over trials. Merging is plain addition, so the order in
/// which tallies are merged fixes the floating-point result.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct TrialTally {
    pub n: u64,
    pub sum_closed: f64,
    pub sum_closed_sq: f64,
    pub outages: u64,
    /// Sums of `indicator - closed` per trial and of its square.
    pub sum_diff: f64,
    pub sum_diff_sq: f64,
}

impl TrialTally {
    pub fn record(&mut self, closed: f64, outage: bool) {
        let diff = if outage { 1.0 } else { 0.0 } - closed;
        self.n += 1;
        self.sum_closed += closed;
        self.sum_closed_sq += closed * closed;
        self.outages += outage as u64;
        self.sum_diff += diff;
        self.sum_diff_sq += diff * diff;
    }

    pub fn merge(&mut self, other: &TrialTally) {
        self.n += other.n;
        self.sum_closed += other.sum_closed;
        self.sum_closed_sq += other.sum_closed_sq;
        self.outages += other.outages;
        self.sum_diff += other.sum_diff;
        self.sum_diff_sq += other.sum_diff_sq;
    }

    pub fn estimate(&self) -> OutageEstimate {
        let n = self.n.max(1) as f64;
        let p_closed = self.sum_closed / n;
        let p_mc = self.outages as f64 / n;
        let std_err = |sum: f64, sum_sq: f64| {
            if self.n < 2 {
                return 0.0;
            }
            let mean = sum / n;
            let var = ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0);
            (var / n).sqrt()
        };
        OutageEstimate {
            p_out_closed: p_closed.clamp(0.0, 1.0),
            p_out_mc: p_mc,
            ci95_halfwidth: 1.96 * (p_mc * (1.0 - p_mc) / n).sqrt(),
            n_trials: self.n,
            closed_std_error: std_err(self.sum_closed, self.sum_closed_sq),
            paired_std_error: std_err(self.sum_diff, self.sum_diff_sq),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutageEstimate {
    /// Mean of the conditional closed form over interferer fading.
    pub p_out_closed: f64,
    /// Fraction of trials with `S̄ Z_0 < γ I`.
    pub p_out_mc: f64,
    /// `1.96 · sqrt(p̂(1 - p̂)/n)` for `p_out_mc`.
    pub ci95_halfwidth: f64,
    pub n_trials: u64,
    pub closed_std_error: f64,
    /// Standard error of the per-trial difference `indicator - closed`.
    pub paired_std_error: f64,
}

impl OutageEstimate {
    pub fn mc_std_error(&self) -> f64 {
        let n = self.n_trials.max(1) as f64;
        (self.p_out_mc * (1.0 - self.p_out_mc) / n).sqrt()
    }

    /// Both standard errors added in quadrature, ignoring their correlation.
    pub fn combined_std_error(&self) -> f64 {
        self.closed_std_error.hypot(self.mc_std_error())
    }
}

/// Independent seed for sub-task `stream` of a run seeded with `seed`.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng.random()
}

/// Where the UE sits for a given reference FAP.
pub fn place_ue(
    deployment: &Deployment,
    reference: FapId,
    config: &OutageConfig,
    seed: u64,
) -> Result<Point> {
    let serving = deployment.fap(reference)?;
    let origin = serving.position;
    match config.placement {
        UePlacement::TowardNearestNeighbor => {
            let nearest = deployment
                .faps
                .iter()
                .filter(|f| f.id != reference)
                .min_by(|a, b| {
                    origin
                        .distance(&a.position)
                        .total_cmp(&origin.distance(&b.position))
                        .then(a.id.cmp(&b.id))
                });
            Ok(match nearest {
                Some(f) => origin.toward(&f.position, config.ue_distance),
                None => Point::new(origin.x + config.ue_distance, origin.y),
            })
        }
        UePlacement::RandomDirection => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(u64::MAX);
            let angle = rng.random_range(0.0..std::f64::consts::TAU);
            let offset = Point::from_polar(config.ue_distance, angle);
            Ok(Point::new(origin.x + offset.x, origin.y + offset.y))
        }
    }
}

/// Runs `n_trials` trials for the UE of `reference` and returns the raw
/// tally, so that tallies from several deployments can be pooled.
pub fn run_trials(
    deployment: &Deployment,
    graph: &NeighborGraph,
    reference: FapId,
    plan: &FrequencyPlan,
    config: &OutageConfig,
    params: &PropagationParams,
    seed: u64,
) -> Result<TrialTally> {
    config.validate()?;
    params.validate()?;
    let serving = deployment.fap(reference)?;
    if config.ue_distance > serving.radius {
        return Err(Error::InvalidOutageConfig(format!(
            "UE distance {} m exceeds the femto radius {} m",
            config.ue_distance, serving.radius
        )));
    }
    let ue = place_ue(deployment, reference, config, seed)?;
    let budget = LinkBudget::new(
        deployment,
        graph,
        reference,
        ue,
        plan,
        config.ue_region,
        params,
    )?;
    let gamma = config.gamma_linear();
    let n_neighbors = budget.neighbor_count();

    let shards = config.shards as u64;
    let per_shard = config.n_trials / shards;
    let extra = config.n_trials % shards;
    let tallies: Vec<Result<TrialTally>> = (0..shards)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k);
            let trials = per_shard + u64::from(k < extra);
            let mut tally = TrialTally::default();
            let mut sample = ChannelSample::unit(n_neighbors);
            for _ in 0..trials {
                sample.redraw(n_neighbors, &mut rng);
                let i = budget.total_interference(&sample)?;
                let closed = conditional_outage(budget.s_bar, i, gamma)?;
                tally.record(closed, budget.s_bar * sample.z0 < gamma * i);
            }
            Ok(tally)
        })
        .collect();

    let mut total = TrialTally::default();
    for t in tallies {
        total.merge(&t?);
    }
    Ok(total)
}

/// Outage estimate for the UE of `reference` under `plan`.
pub fn estimate(
    deployment: &Deployment,
    graph: &NeighborGraph,
    reference: FapId,
    plan: &FrequencyPlan,
    config: &OutageConfig,
    params: &PropagationParams,
    seed: u64,
) -> Result<OutageEstimate> {
    run_trials(deployment, graph, reference, plan, config, params, seed).map(|t| t.estimate())
}

/// One curve of a density sweep: a scheme and, for dynamic re-use, how the
/// edge slices are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SweepVariant {
    pub scheme: Scheme,
    pub edges: EdgeAssignment,
}

impl SweepVariant {
    pub fn new(scheme: Scheme) -> Self {
        Self {
            scheme,
            edges: EdgeAssignment::Greedy,
        }
    }

    /// `dynamic`, `dynamic+random`, `same`, ...
    pub fn label(&self) -> String {
        if self.scheme.has_edge_bands() && self.edges != EdgeAssignment::Greedy {
            format!("{}+{}", self.scheme.name(), self.edges.name())
        } else {
            self.scheme.name().to_string()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSetup {
    /// `femto_count` is overridden by each density.
    pub deployment: DeploymentParams,
    pub total_band: Band,
    pub femto_fraction: f64,
    pub edge_split: f64,
    /// Independent deployments per density; their trials are pooled.
    pub n_deployments: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub label: String,
    pub scheme: Scheme,
    pub density: usize,
    pub estimate: OutageEstimate,
    pub seed: u64,
}

/// Outage for each variant at each FAP count, rows ordered by density and
/// then by `variants`.
///
/// Deployment `r` of every density is generated from the same derived seed,
/// so a sparser deployment is a prefix of the denser one. All variants of a
/// cell see the same deployment and the same fading draws. FAP counts at or
/// above the dense threshold use scenario D, smaller ones scenario C.
pub fn density_sweep(
    densities: &[usize],
    variants: &[SweepVariant],
    setup: &SweepSetup,
    config: &OutageConfig,
    params: &PropagationParams,
    seed: u64,
) -> Result<Vec<SweepRow>> {
    if densities.is_empty() {
        return Err(Error::InvalidOutageConfig("density list is empty".into()));
    }
    if densities.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidOutageConfig(format!(
            "densities must be strictly increasing, got {densities:?}"
        )));
    }
    if variants.is_empty() {
        return Err(Error::InvalidOutageConfig("scheme list is empty".into()));
    }
    if setup.n_deployments == 0 {
        return Err(Error::InvalidOutageConfig(
            "n_deployments must be at least 1".into(),
        ));
    }
    config.validate()?;
    params.validate()?;

    let plans = variants
        .iter()
        .map(|v| {
            build_plan(
                v.scheme,
                setup.total_band,
                setup.deployment.n_sectors,
                setup.femto_fraction,
                setup.edge_split,
            )
        })
        .collect::<Result<Vec<_>>>()?;

    let mut rows = Vec::with_capacity(densities.len() * variants.len());
    for &density in densities {
        let dparams = DeploymentParams {
            femto_count: density,
            ..setup.deployment.clone()
        };
        let scenario = if density >= dparams.dense_threshold {
            Scenario::D
        } else {
            Scenario::C
        };
        let mut pooled = vec![TrialTally::default(); variants.len()];
        for r in 0..u64::from(setup.n_deployments) {
            let dseed = derive_seed(seed, 2 * r);
            let tseed = derive_seed(seed, 2 * r + 1);
            let base = generate(scenario, &dparams, dseed)?;
            let graph = neighbor_graph(&base, dparams.neighbor_radius)?;
            for ((variant, plan), tally) in variants.iter().zip(&plans).zip(&mut pooled) {
                let mut d = base.clone();
                if plan.scheme().has_edge_bands() {
                    match variant.edges {
                        EdgeAssignment::Greedy => {
                            SonCoordinator::default()
                                .configure_frequencies(&mut d, &graph, plan)?;
                        }
                        EdgeAssignment::UniformRandom => assign_random_edges(&mut d, dseed),
                        EdgeAssignment::Shared => assign_shared_edge(&mut d, EdgeColor::X),
                    }
                }
                let t = run_trials(&d, &graph, d.reference(), plan, config, params, tseed)?;
                tally.merge(&t);
            }
        }
        for (variant, tally) in variants.iter().zip(pooled) {
            rows.push(SweepRow {
                label: variant.label(),
                scheme: variant.scheme,
                density,
                estimate: tally.estimate(),
                seed,
            });
        }
    }
    Ok(rows)
}
