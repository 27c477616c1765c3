//! Self-organising coordination between FAPs.
//!
//! A [`SonCoordinator`] owns an append-only [`EventLog`] and mutates a
//! [`Deployment`] between outage passes:
//!
//! - [`configure_frequencies`](SonCoordinator::configure_frequencies) colors
//!   the neighbor graph with the three edge slices so that neighbors avoid
//!   sharing an edge band.
//! - [`adjust_power`](SonCoordinator::adjust_power) lets a victim's serving
//!   FAP ask its strongest co-channel neighbors to back off in 1 dB steps,
//!   shrinking their cell radius accordingly.
//! - [`admit_fap`](SonCoordinator::admit_fap) adds a new FAP and picks its
//!   edge slice from what its neighbors already use, without touching them.
//!
//! Every mutation is logged, so replaying the log on a copy of the starting
//! deployment reproduces the end state exactly.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufRead, Write};

use rand::{Rng as _, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{linear_to_db, LinkBudget, PropagationParams};
use crate::error::{Error, Result};
use crate::spectrum::{EdgeColor, FrequencyPlan, UeRegion};
use crate::topology::{Deployment, Fap, FapId, NeighborGraph, Point};

#[derive(Debug, Clone, PartialEq)]
pub struct SonConfig {
    pub power_step_db: f64,
    pub margin_db: f64,
    pub power_floor_w: f64,
    /// Inner-circle radius as a fraction of the femto radius.
    pub inner_radius_fraction: f64,
}

impl Default for SonConfig {
    fn default() -> Self {
        Self {
            power_step_db: 1.0,
            margin_db: 3.0,
            power_floor_w: 1e-4,
            inner_radius_fraction: 0.5,
        }
    }
}

impl SonConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.power_step_db.is_finite() && self.power_step_db > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "power step must be positive, got {} dB",
                self.power_step_db
            )));
        }
        if !(self.power_floor_w.is_finite() && self.power_floor_w > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "power floor must be positive, got {} W",
                self.power_floor_w
            )));
        }
        if !self.margin_db.is_finite() {
            return Err(Error::InvalidConfig("SON margin must be finite".into()));
        }
        if !(self.inner_radius_fraction > 0.0 && self.inner_radius_fraction <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "inner radius fraction must lie in (0, 1], got {}",
                self.inner_radius_fraction
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EventKind {
    Reconfigure,
    PowerRequest,
    NewFap,
    ColorConflict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "payload")]
pub enum EventDetails {
    /// The subject now uses this edge slice.
    Reconfigure { edge: EdgeColor },
    /// `master` asked the subject to change power by `delta_db`; the
    /// resulting power and radius are recorded.
    PowerRequest {
        master: FapId,
        delta_db: f64,
        tx_power: f64,
        radius: f64,
    },
    NewFap {
        x: f64,
        y: f64,
        height: f64,
        sector: usize,
        tx_power: f64,
        radius: f64,
    },
    /// The subject had to share `edge` with `partners`.
    ColorConflict {
        edge: EdgeColor,
        partners: Vec<FapId>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SonEvent {
    pub seq: u64,
    pub subject: FapId,
    #[serde(flatten)]
    pub details: EventDetails,
}

impl SonEvent {
    pub fn kind(&self) -> EventKind {
        match self.details {
            EventDetails::Reconfigure { .. } => EventKind::Reconfigure,
            EventDetails::PowerRequest { .. } => EventKind::PowerRequest,
            EventDetails::NewFap { .. } => EventKind::NewFap,
            EventDetails::ColorConflict { .. } => EventKind::ColorConflict,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct EventLog {
    events: Vec<SonEvent>,
}

impl EventLog {
    pub fn events(&self) -> &[SonEvent] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    fn push(&mut self, subject: FapId, details: EventDetails) {
        let seq = self.events.len() as u64;
        self.events.push(SonEvent {
            seq,
            subject,
            details,
        });
    }

    /// Writes one JSON record per line.
    pub fn write_ndjson<W: Write>(&self, mut out: W) -> Result<()> {
        for e in &self.events {
            serde_json::to_writer(&mut out, e)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn read_ndjson<R: BufRead>(input: R) -> Result<Self> {
        let mut events = Vec::new();
        for line in input.lines() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let event: SonEvent = serde_json::from_str(&line)?;
            if event.seq != events.len() as u64 {
                return Err(Error::EventRecord(format!(
                    "sequence number {} out of order, expected {}",
                    event.seq,
                    events.len()
                )));
            }
            events.push(event);
        }
        Ok(Self { events })
    }

    /// Applies every event, in order, to `deployment`.
    pub fn replay(&self, deployment: &mut Deployment) -> Result<()> {
        replay(&self.events, deployment)
    }
}

/// Applies `events` in order to `deployment`.
pub fn replay(events: &[SonEvent], deployment: &mut Deployment) -> Result<()> {
    for e in events {
        match &e.details {
            EventDetails::Reconfigure { edge } => deployment.fap_mut(e.subject)?.edge = Some(*edge),
            EventDetails::PowerRequest {
                tx_power, radius, ..
            } => {
                let fap = deployment.fap_mut(e.subject)?;
                fap.tx_power = *tx_power;
                fap.radius = *radius;
            }
            EventDetails::NewFap {
                x,
                y,
                height,
                sector,
                tx_power,
                radius,
            } => {
                if e.subject.index() != deployment.faps.len() {
                    return Err(Error::Replay(format!(
                        "new FAP {} does not extend a deployment of {} FAPs",
                        e.subject,
                        deployment.faps.len()
                    )));
                }
                deployment.faps.push(Fap {
                    id: e.subject,
                    position: Point::new(*x, *y),
                    height: *height,
                    tx_power: *tx_power,
                    radius: *radius,
                    sector_index: *sector,
                    edge: None,
                });
            }
            EventDetails::ColorConflict { .. } => {}
        }
    }
    Ok(())
}

/// Edge colors plus the neighbor pairs that share one.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ColoringState {
    pub colors: BTreeMap<FapId, EdgeColor>,
    /// Graph edges `(low, high)` whose endpoints have the same color.
    pub conflicts: BTreeSet<(FapId, FapId)>,
}

impl ColoringState {
    pub fn from_colors(graph: &NeighborGraph, colors: BTreeMap<FapId, EdgeColor>) -> Self {
        let conflicts = graph
            .edges()
            .filter(|(a, b)| matches!((colors.get(a), colors.get(b)), (Some(x), Some(y)) if x == y))
            .collect();
        Self { colors, conflicts }
    }

    pub fn from_deployment(deployment: &Deployment, graph: &NeighborGraph) -> Self {
        let colors = deployment
            .faps
            .iter()
            .filter_map(|f| f.edge.map(|c| (f.id, c)))
            .collect();
        Self::from_colors(graph, colors)
    }

    pub fn conflict_count(&self) -> usize {
        self.conflicts.len()
    }

    /// True when the cached conflict set matches a fresh recount.
    pub fn is_consistent(&self, graph: &NeighborGraph) -> bool {
        Self::from_colors(graph, self.colors.clone()).conflicts == self.conflicts
    }
}

#[derive(Clone, Copy)]
enum FreeColorRule {
    /// Among colors no neighbor uses, the one used least so far overall.
    LeastUsed,
    /// The color fewest neighbors use, ties to the lower index. Matches
    /// single-FAP admission.
    First,
}

/// Coloring passes over a fixed graph. Colors are indices 0..3.
struct Colorer<'a> {
    graph: &'a NeighborGraph,
    positions: Vec<Point>,
}

impl Colorer<'_> {
    /// Same-colored neighbor count and summed inverse squared distance, per
    /// color, over the neighbors of `id` that already have a color.
    fn tally(&self, id: FapId, colors: &[Option<usize>]) -> ([usize; 3], [f64; 3]) {
        let mut count = [0usize; 3];
        let mut weight = [0f64; 3];
        for &n in self.graph.neighbors(id) {
            if let Some(c) = colors[n.index()] {
                count[c] += 1;
                let d2 = self.positions[id.index()]
                    .distance(&self.positions[n.index()])
                    .powi(2);
                weight[c] += 1.0 / d2.max(f64::MIN_POSITIVE);
            }
        }
        (count, weight)
    }

    fn least_conflicting(count: &[usize; 3], weight: &[f64; 3]) -> usize {
        (0..3)
            .min_by(|&a, &b| {
                count[a]
                    .cmp(&count[b])
                    .then(weight[a].total_cmp(&weight[b]))
                    .then(a.cmp(&b))
            })
            .expect("three colors")
    }

    fn greedy(&self, order: &[FapId], rule: FreeColorRule) -> Vec<usize> {
        let mut colors: Vec<Option<usize>> = vec![None; self.positions.len()];
        let mut usage = [0usize; 3];
        for &id in order {
            let (count, weight) = self.tally(id, &colors);
            let chosen = match rule {
                FreeColorRule::LeastUsed => (0..3)
                    .filter(|&c| count[c] == 0)
                    .min_by_key(|&c| (usage[c], c))
                    .unwrap_or_else(|| Self::least_conflicting(&count, &weight)),
                FreeColorRule::First => {
                    (0..3).min_by_key(|&c| (count[c], c)).expect("three colors")
                }
            };
            usage[chosen] += 1;
            colors[id.index()] = Some(chosen);
        }
        colors
            .into_iter()
            .map(|c| c.expect("every FAP visited"))
            .collect()
    }

    fn improve(&self, colors: &mut [usize]) {
        const MAX_SWEEPS: usize = 1000;
        let mut current: Vec<Option<usize>> = colors.iter().copied().map(Some).collect();
        for _ in 0..MAX_SWEEPS {
            let mut changed = false;
            for i in 0..current.len() {
                let id = FapId(i as u32);
                let now = current[i].expect("colored");
                let (count, weight) = self.tally(id, &current);
                let best = Self::least_conflicting(&count, &weight);
                if count[best] < count[now]
                    || (count[best] == count[now] && weight[best] < weight[now])
                {
                    current[i] = Some(best);
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        for (c, n) in colors.iter_mut().zip(current) {
            *c = n.expect("colored");
        }
    }

    /// (conflicting pairs, distance-weighted conflict) of a full coloring.
    fn cost(&self, colors: &[usize]) -> (usize, OrderedWeight) {
        let mut pairs = 0;
        let mut weight = 0.0;
        for (a, b) in self.graph.edges() {
            if colors[a.index()] == colors[b.index()] {
                pairs += 1;
                let d2 = self.positions[a.index()]
                    .distance(&self.positions[b.index()])
                    .powi(2);
                weight += 1.0 / d2.max(f64::MIN_POSITIVE);
            }
        }
        (pairs, OrderedWeight(weight))
    }
}

#[derive(PartialEq, PartialOrd)]
struct OrderedWeight(f64);

/// How edge slices are handed out under dynamic re-use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EdgeAssignment {
    /// SON greedy coloring.
    Greedy,
    /// Independent uniform choice per FAP.
    UniformRandom,
    /// Every FAP on slice `X`.
    Shared,
}

impl EdgeAssignment {
    pub fn name(&self) -> &'static str {
        match self {
            EdgeAssignment::Greedy => "greedy",
            EdgeAssignment::UniformRandom => "random",
            EdgeAssignment::Shared => "shared",
        }
    }
}

/// Uniformly random edge slices, independent per FAP. Baseline for the
/// coordinated coloring; not logged.
pub fn assign_random_edges(deployment: &mut Deployment, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for fap in &mut deployment.faps {
        fap.edge = EdgeColor::from_index(rng.random_range(0..3));
    }
}

/// One edge slice for everyone.
pub fn assign_shared_edge(deployment: &mut Deployment, color: EdgeColor) {
    for fap in &mut deployment.faps {
        fap.edge = Some(color);
    }
}

/// The UE whose SIR drives a power-control pass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VictimUe {
    /// Serving FAP; acts as master for the power requests.
    pub serving: FapId,
    pub position: Point,
    pub region: UeRegion,
}

#[derive(Debug, Clone, Default)]
pub struct SonCoordinator {
    pub config: SonConfig,
    log: EventLog,
}

impl SonCoordinator {
    pub fn new(config: SonConfig) -> Self {
        Self {
            config,
            log: EventLog::default(),
        }
    }

    pub fn log(&self) -> &EventLog {
        &self.log
    }

    pub fn into_log(self) -> EventLog {
        self.log
    }

    fn events_since(&self, start: usize) -> Vec<SonEvent> {
        self.log.events[start..].to_vec()
    }

    /// Edge-slice coloring of the whole neighbor graph.
    ///
    /// Two greedy colorings are built and each is improved locally; the one
    /// with fewer conflicting pairs wins (ties: smaller distance-weighted
    /// conflict, then the degree-ordered start).
    ///
    /// - Degree order: FAPs by descending degree, ties by ascending id. A FAP
    ///   takes a color none of its already-colored neighbors uses, preferring
    ///   the one used least so far overall.
    /// - Arrival order: FAPs by ascending id, each colored exactly as
    ///   [`admit_fap`](Self::admit_fap) would. The result is therefore never
    ///   worse than admitting the same FAPs one at a time.
    ///
    /// In degree order, when all three colors are taken by neighbors, the
    /// color with the fewest same-colored neighbors is used, ties broken by
    /// the smaller summed inverse squared distance to them, then X < Y < Z.
    ///
    /// Local improvement sweeps in id order; a FAP switches color when that
    /// strictly lowers its same-colored neighbor count, or keeps the count
    /// and lowers the distance weight. Each switch lowers the global
    /// (conflicts, weighted conflicts) pair, so the sweeps terminate.
    ///
    /// Each FAP's final color is logged as `Reconfigure`; every FAP still
    /// sharing its slice with a neighbor gets a `ColorConflict`.
    pub fn configure_frequencies(
        &mut self,
        deployment: &mut Deployment,
        graph: &NeighborGraph,
        plan: &FrequencyPlan,
    ) -> Result<ColoringState> {
        if !plan.scheme().has_edge_bands() {
            return Err(Error::NoEdgeStructure(plan.scheme()));
        }
        if graph.len() != deployment.faps.len() {
            return Err(Error::InvalidDeployment(format!(
                "neighbor graph covers {} of {} FAPs",
                graph.len(),
                deployment.faps.len()
            )));
        }

        let colorer = Colorer {
            graph,
            positions: deployment.faps.iter().map(|f| f.position).collect(),
        };
        let mut by_degree: Vec<FapId> = deployment.faps.iter().map(|f| f.id).collect();
        by_degree.sort_by_key(|&id| (std::cmp::Reverse(graph.degree(id)), id));
        let by_arrival: Vec<FapId> = deployment.faps.iter().map(|f| f.id).collect();

        let mut degree_start = colorer.greedy(&by_degree, FreeColorRule::LeastUsed);
        colorer.improve(&mut degree_start);
        let mut arrival_start = colorer.greedy(&by_arrival, FreeColorRule::First);
        colorer.improve(&mut arrival_start);
        let colors = if colorer.cost(&arrival_start) < colorer.cost(&degree_start) {
            arrival_start
        } else {
            degree_start
        };

        for (fap, &color) in deployment.faps.iter_mut().zip(&colors) {
            let color = EdgeColor::from_index(color).expect("index below three");
            fap.edge = Some(color);
            self.log
                .push(fap.id, EventDetails::Reconfigure { edge: color });
        }
        for fap in &deployment.faps {
            let color = colors[fap.id.index()];
            let partners: Vec<FapId> = graph
                .neighbors(fap.id)
                .iter()
                .copied()
                .filter(|n| colors[n.index()] == color)
                .collect();
            if !partners.is_empty() {
                self.log.push(
                    fap.id,
                    EventDetails::ColorConflict {
                        edge: EdgeColor::from_index(color).expect("index below three"),
                        partners,
                    },
                );
            }
        }
        Ok(ColoringState::from_deployment(deployment, graph))
    }

    /// Interference-triggered power reduction.
    ///
    /// While the victim's fading-averaged SIR `S̄ / E[I]` is below
    /// `gamma_db + margin`, the strongest co-channel neighbor still above the
    /// power floor is asked to drop by one step (clamped at the floor), and its
    /// radius shrinks by `10^(Δ/(10·η₁))` so the received power at its cell
    /// edge is unchanged. Returns the `PowerRequest` events issued; empty when
    /// the victim has no co-channel femto interferer or already meets the
    /// target.
    #[allow(clippy::too_many_arguments)]
    pub fn adjust_power(
        &mut self,
        deployment: &mut Deployment,
        graph: &NeighborGraph,
        plan: &FrequencyPlan,
        victim: &VictimUe,
        params: &PropagationParams,
        gamma_db: f64,
    ) -> Result<Vec<SonEvent>> {
        self.config.validate()?;
        let start = self.log.len();
        let target_db = gamma_db + self.config.margin_db;
        let floor = self.config.power_floor_w;
        let step = 10f64.powf(-self.config.power_step_db / 10.0);

        let budget = |d: &Deployment| {
            LinkBudget::new(
                d,
                graph,
                victim.serving,
                victim.position,
                plan,
                victim.region,
                params,
            )
        };
        let initial = budget(deployment)?;
        let interferers = initial.femto_cochannel.iter().filter(|&&x| x).count();
        if interferers == 0 {
            return Ok(Vec::new());
        }
        let max_db = initial
            .neighbors
            .iter()
            .map(|&id| deployment.fap(id).map(|f| linear_to_db(f.tx_power / floor)))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        let max_steps = ((max_db / self.config.power_step_db).ceil() as usize + 1) * interferers;

        for _ in 0..max_steps {
            let b = budget(deployment)?;
            let interference = b.mean_interference();
            if interference == 0.0 || linear_to_db(b.s_bar / interference) >= target_db {
                break;
            }
            let strongest = b
                .neighbors
                .iter()
                .zip(&b.femto_mean)
                .filter(|(id, &m)| m > 0.0 && deployment.faps[id.index()].tx_power > floor)
                .max_by(|a, b| a.1.total_cmp(b.1).then(b.0.cmp(a.0)))
                .map(|(id, _)| *id);
            let Some(id) = strongest else { break };
            let fap = deployment.fap_mut(id)?;
            let new_power = (fap.tx_power * step).max(floor);
            let delta_db = linear_to_db(new_power / fap.tx_power);
            fap.tx_power = new_power;
            fap.radius *= 10f64.powf(delta_db / (10.0 * params.eta_desired));
            let (tx_power, radius) = (fap.tx_power, fap.radius);
            self.log.push(
                id,
                EventDetails::PowerRequest {
                    master: victim.serving,
                    delta_db,
                    tx_power,
                    radius,
                },
            );
        }
        Ok(self.events_since(start))
    }

    /// Admits a new FAP at `position` and picks its edge slice.
    ///
    /// The new FAP sniffs every FAP within the neighbor radius and takes the
    /// first slice none of them uses, else the least used one. Existing FAPs
    /// keep their colors. Under schemes without edge slices only the
    /// `NewFap` event is logged.
    pub fn admit_fap(
        &mut self,
        deployment: &mut Deployment,
        graph: &mut NeighborGraph,
        plan: &FrequencyPlan,
        position: Point,
    ) -> Result<(FapId, Vec<SonEvent>)> {
        let start = self.log.len();
        let fap = deployment.make_fap(position)?;
        let id = fap.id;
        self.log.push(
            id,
            EventDetails::NewFap {
                x: fap.position.x,
                y: fap.position.y,
                height: fap.height,
                sector: fap.sector_index,
                tx_power: fap.tx_power,
                radius: fap.radius,
            },
        );
        deployment.faps.push(fap);
        let neighbors = graph.insert_last(deployment)?;

        if plan.scheme().has_edge_bands() {
            let mut count = [0usize; 3];
            for n in &neighbors {
                if let Some(c) = deployment.faps[n.index()].edge {
                    count[c.index()] += 1;
                }
            }
            let chosen = (0..3).min_by_key(|&c| (count[c], c)).expect("three colors");
            let color = EdgeColor::from_index(chosen).expect("index below three");
            deployment.faps[id.index()].edge = Some(color);
            self.log.push(id, EventDetails::Reconfigure { edge: color });
            if count[chosen] > 0 {
                let partners = neighbors
                    .iter()
                    .copied()
                    .filter(|n| deployment.faps[n.index()].edge == Some(color))
                    .collect();
                self.log.push(
                    id,
                    EventDetails::ColorConflict {
                        edge: color,
                        partners,
                    },
                );
            }
        }
        Ok((id, self.events_since(start)))
    }
}

/// Fraction of ordered neighbor pairs `(victim, other)` whose co-channel
/// indicator `X_i` is zero for an edge UE of `victim`.
pub fn orthogonal_pair_fraction(
    deployment: &Deployment,
    graph: &NeighborGraph,
    plan: &FrequencyPlan,
) -> Result<f64> {
    use crate::spectrum::{cochannel, Interferer};
    let mut pairs = 0usize;
    let mut orthogonal = 0usize;
    for fap in &deployment.faps {
        let alloc = fap.allocation(plan)?;
        for &n in graph.neighbors(fap.id) {
            let other = deployment.fap(n)?.allocation(plan)?;
            pairs += 1;
            if !cochannel(plan, &alloc, UeRegion::Edge, Interferer::Femto(&other)) {
                orthogonal += 1;
            }
        }
    }
    Ok(if pairs == 0 {
        1.0
    } else {
        orthogonal as f64 / pairs as f64
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::db_to_linear;
    use crate::spectrum::{build_plan, Band, Scheme};
    use crate::topology::{generate, neighbor_graph, DeploymentParams, Scenario};
    use proptest::prelude::*;

    fn plan(scheme: Scheme) -> FrequencyPlan {
        build_plan(scheme, Band::new(0, 60_000_000).unwrap(), 3, 1.0 / 3.0, 0.5).unwrap()
    }

    /// Deployment with FAPs at `points`, all in sector 0, neighbor radius 100.
    fn layout(points: &[(f64, f64)]) -> (Deployment, NeighborGraph) {
        let mut d = generate(
            Scenario::C,
            &DeploymentParams {
                femto_count: points.len().max(2),
                reference_distance: None,
                ..Default::default()
            },
            0,
        )
        .unwrap();
        d.faps.truncate(points.len());
        for (f, &(x, y)) in d.faps.iter_mut().zip(points) {
            f.position = Point::new(x, y);
            f.sector_index = 0;
        }
        let g = neighbor_graph(&d, 100.0).unwrap();
        (d, g)
    }

    fn brute_conflicts(d: &Deployment, g: &NeighborGraph) -> usize {
        let mut n = 0;
        for a in &d.faps {
            for b in &d.faps {
                if a.id < b.id
                    && g.contains_edge(a.id, b.id)
                    && a.edge.is_some()
                    && a.edge == b.edge
                {
                    n += 1;
                }
            }
        }
        n
    }

    #[test]
    fn triangle_gets_three_colors() {
        let (mut d, g) = layout(&[(300.0, 100.0), (340.0, 100.0), (320.0, 130.0)]);
        let mut son = SonCoordinator::default();
        let state = son
            .configure_frequencies(&mut d, &g, &plan(Scheme::DynamicReuse))
            .unwrap();
        assert_eq!(state.conflict_count(), 0);
        let distinct: BTreeSet<_> = state.colors.values().collect();
        assert_eq!(distinct.len(), 3);
        assert!(son
            .log()
            .events()
            .iter()
            .all(|e| e.kind() == EventKind::Reconfigure));
    }

    /// Minimum number of monochromatic edges over all 3-colorings.
    fn brute_min_conflicts(n: usize, edges: &[(usize, usize)]) -> usize {
        (0..3usize.pow(n as u32))
            .map(|code| {
                let color = |v: usize| (code / 3usize.pow(v as u32)) % 3;
                edges.iter().filter(|&&(a, b)| color(a) == color(b)).count()
            })
            .min()
            .unwrap()
    }

    #[test]
    fn four_clique_needs_a_conflict() {
        let edges = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];
        assert_eq!(brute_min_conflicts(4, &edges), 1);
        let (mut d, g) = layout(&[
            (300.0, 100.0),
            (340.0, 100.0),
            (300.0, 140.0),
            (340.0, 140.0),
        ]);
        assert_eq!(g.edge_count(), 6);
        let mut son = SonCoordinator::default();
        let state = son
            .configure_frequencies(&mut d, &g, &plan(Scheme::DynamicReuse))
            .unwrap();
        assert_eq!(state.conflict_count(), 1);
        assert!(son
            .log()
            .events()
            .iter()
            .any(|e| e.kind() == EventKind::ColorConflict));
    }

    #[test]
    fn coloring_requires_edge_bands() {
        let (mut d, g) = layout(&[(300.0, 100.0), (340.0, 100.0)]);
        let mut son = SonCoordinator::default();
        assert!(matches!(
            son.configure_frequencies(&mut d, &g, &plan(Scheme::Dedicated)),
            Err(Error::NoEdgeStructure(Scheme::Dedicated))
        ));
    }

    proptest! {
        #[test]
        fn paths_are_conflict_free(len in 1usize..40, spacing in 20.0f64..90.0) {
            let points: Vec<(f64, f64)> =
                (0..len).map(|i| (100.0 + i as f64 * spacing, 50.0)).collect();
            let (mut d, g) = layout(&points);
            // Only consecutive FAPs are neighbors when spacing > 50 m.
            prop_assume!(spacing > 50.0);
            let mut son = SonCoordinator::default();
            let state = son.configure_frequencies(&mut d, &g, &plan(Scheme::DynamicReuse)).unwrap();
            prop_assert_eq!(state.conflict_count(), 0);
        }

        #[test]
        fn conflicts_match_recount(seed in 0u64..1000, n in 2usize..400) {
            let params = DeploymentParams { femto_count: n, ..Default::default() };
            let mut d = generate(Scenario::C, &params, seed).unwrap();
            let g = neighbor_graph(&d, 100.0).unwrap();
            let mut son = SonCoordinator::default();
            let state = son.configure_frequencies(&mut d, &g, &plan(Scheme::DynamicReuse)).unwrap();
            prop_assert!(state.is_consistent(&g));
            prop_assert_eq!(state.conflict_count(), brute_conflicts(&d, &g));
            prop_assert_eq!(state.colors.len(), n);
        }

        #[test]
        fn comb_trees_are_conflict_free(teeth in proptest::collection::vec(0usize..5, 1..12)) {
            // Spine every 80 m with a tooth hanging from every other spine node;
            // all non-tree pairs are at least 113 m apart.
            let mut points = Vec::new();
            for (j, &len) in teeth.iter().enumerate() {
                let x = -400.0 + 160.0 * j as f64;
                points.push((x, 300.0));
                points.push((x + 80.0, 300.0));
                for k in 1..=len {
                    points.push((x, 300.0 - 80.0 * k as f64));
                }
            }
            let (mut d, g) = layout(&points);
            prop_assert_eq!(g.edge_count(), points.len() - 1);
            let mut son = SonCoordinator::default();
            let state = son.configure_frequencies(&mut d, &g, &plan(Scheme::DynamicReuse)).unwrap();
            prop_assert_eq!(state.conflict_count(), 0);
        }
    }

    #[test]
    fn even_cycle_conflict_free() {
        for n in [4usize, 6, 8, 12] {
            let r = 60.0 / (2.0 * (std::f64::consts::PI / n as f64).sin());
            let points: Vec<(f64, f64)> = (0..n)
                .map(|k| {
                    let a = std::f64::consts::TAU * k as f64 / n as f64;
                    (500.0 + r * a.cos(), 200.0 + r * a.sin())
                })
                .collect();
            let (mut d, g) = layout(&points);
            if g.edge_count() != n {
                continue;
            }
            let mut son = SonCoordinator::default();
            let state = son
                .configure_frequencies(&mut d, &g, &plan(Scheme::DynamicReuse))
                .unwrap();
            assert_eq!(state.conflict_count(), 0, "cycle of {n}");
        }
    }

    #[test]
    fn greedy_beats_random_assignment() {
        let params = DeploymentParams::default();
        let p = plan(Scheme::DynamicReuse);
        for seed in 0..3 {
            let mut d = generate(Scenario::D, &params, seed).unwrap();
            let g = neighbor_graph(&d, 100.0).unwrap();
            let mut rnd = d.clone();
            assign_random_edges(&mut rnd, seed);
            let random = ColoringState::from_deployment(&rnd, &g).conflict_count();
            let greedy = SonCoordinator::default()
                .configure_frequencies(&mut d, &g, &p)
                .unwrap()
                .conflict_count();
            assert!(greedy < random, "greedy {greedy} random {random}");
            assert!(
                orthogonal_pair_fraction(&d, &g, &p).unwrap()
                    > orthogonal_pair_fraction(&rnd, &g, &p).unwrap()
            );
        }
    }

    fn victim_setup(interferer_gap: f64) -> (Deployment, NeighborGraph, VictimUe) {
        let (d, g) = layout(&[(300.0, 100.0), (300.0 + interferer_gap, 100.0)]);
        let victim = VictimUe {
            serving: FapId(0),
            position: Point::new(305.0, 100.0),
            region: UeRegion::Edge,
        };
        (d, g, victim)
    }

    #[test]
    fn power_steps_match_sir_gap() {
        let (mut d, g, victim) = victim_setup(40.0);
        let params = PropagationParams::default();
        let p = plan(Scheme::Dedicated);
        let b = LinkBudget::new(
            &d,
            &g,
            FapId(0),
            victim.position,
            &p,
            UeRegion::Edge,
            &params,
        )
        .unwrap();
        let sir0 = linear_to_db(b.s_bar / b.mean_interference());
        // SIR rises exactly 1 dB per step with a single interferer.
        let gamma_db = sir0 + 9.5 - 3.0;
        let expected_steps = 10;
        assert!(gamma_db + 3.0 - sir0 < 20.0);
        let before = d.faps[1].tx_power;
        let mut son = SonCoordinator::default();
        let events = son
            .adjust_power(&mut d, &g, &p, &victim, &params, gamma_db)
            .unwrap();
        assert_eq!(events.len(), expected_steps);
        let mut last = before;
        for e in &events {
            let EventDetails::PowerRequest {
                tx_power,
                master,
                delta_db,
                ..
            } = e.details
            else {
                panic!("unexpected {e:?}")
            };
            assert_eq!(master, FapId(0));
            assert!(tx_power < last);
            assert!((delta_db + 1.0).abs() < 1e-12);
            last = tx_power;
        }
        let expected_power = before * db_to_linear(-(expected_steps as f64));
        assert!((d.faps[1].tx_power - expected_power).abs() / expected_power < 1e-12);
        let expected_radius = 10.0 * db_to_linear(-(expected_steps as f64) / params.eta_desired);
        assert!((d.faps[1].radius - expected_radius).abs() < 1e-9);
        assert_eq!(d.faps[0].tx_power, before);
    }

    #[test]
    fn power_noop_when_satisfied() {
        let (mut d, g, victim) = victim_setup(40.0);
        let before = d.clone();
        let mut son = SonCoordinator::default();
        let events = son
            .adjust_power(
                &mut d,
                &g,
                &plan(Scheme::Dedicated),
                &victim,
                &PropagationParams::default(),
                -30.0,
            )
            .unwrap();
        assert!(events.is_empty());
        assert_eq!(d, before);
    }

    #[test]
    fn power_noop_without_cochannel_interferer() {
        let (mut d, g, victim) = victim_setup(40.0);
        d.faps[0].edge = Some(EdgeColor::X);
        d.faps[1].edge = Some(EdgeColor::Y);
        let mut son = SonCoordinator::default();
        let events = son
            .adjust_power(
                &mut d,
                &g,
                &plan(Scheme::DynamicReuse),
                &victim,
                &PropagationParams::default(),
                9.0,
            )
            .unwrap();
        assert!(events.is_empty());
    }

    #[test]
    fn power_stops_at_floor() {
        let (mut d, g, victim) = victim_setup(12.0);
        let mut son = SonCoordinator::default();
        let p = plan(Scheme::Dedicated);
        let params = PropagationParams::default();
        let events = son
            .adjust_power(&mut d, &g, &p, &victim, &params, 80.0)
            .unwrap();
        // 20 dB from 10 mW down to the 0.1 mW floor.
        assert_eq!(events.len(), 20);
        assert!((d.faps[1].tx_power - 1e-4).abs() < 1e-18);
        let after = d.clone();
        let again = son
            .adjust_power(&mut d, &g, &p, &victim, &params, 80.0)
            .unwrap();
        assert!(again.is_empty());
        assert_eq!(d, after);
    }

    #[test]
    fn power_never_raises_interference() {
        let params = DeploymentParams::default();
        let p = plan(Scheme::Same);
        let prop = PropagationParams::default();
        let mut d = generate(Scenario::D, &params, 4).unwrap();
        let g = neighbor_graph(&d, 100.0).unwrap();
        let ue = d.faps[0].position.toward(&Point::ORIGIN, 5.0);
        let victim = VictimUe {
            serving: FapId(0),
            position: ue,
            region: UeRegion::Edge,
        };
        let before = d.clone();
        let b0 = LinkBudget::new(&d, &g, FapId(0), ue, &p, UeRegion::Edge, &prop).unwrap();
        let mut son = SonCoordinator::default();
        son.adjust_power(&mut d, &g, &p, &victim, &prop, 25.0)
            .unwrap();
        let b1 = LinkBudget::new(&d, &g, FapId(0), ue, &p, UeRegion::Edge, &prop).unwrap();
        assert!(b1.mean_interference() <= b0.mean_interference());
        for (a, b) in before.faps.iter().zip(&d.faps) {
            assert!(b.tx_power <= a.tx_power);
        }
    }

    #[test]
    fn admission_picks_free_color() {
        let p = plan(Scheme::DynamicReuse);
        let (mut d, mut g) = layout(&[(300.0, 100.0), (340.0, 100.0)]);
        d.faps[0].edge = Some(EdgeColor::X);
        d.faps[1].edge = Some(EdgeColor::Y);
        let mut son = SonCoordinator::default();
        let (id, events) = son
            .admit_fap(&mut d, &mut g, &p, Point::new(320.0, 120.0))
            .unwrap();
        assert_eq!(d.fap(id).unwrap().edge, Some(EdgeColor::Z));
        let kinds: Vec<_> = events.iter().map(SonEvent::kind).collect();
        assert_eq!(kinds, vec![EventKind::NewFap, EventKind::Reconfigure]);
        assert_eq!(d.faps[0].edge, Some(EdgeColor::X));
        assert_eq!(d.faps[1].edge, Some(EdgeColor::Y));

        let (id, _) = son
            .admit_fap(&mut d, &mut g, &p, Point::new(900.0, 100.0))
            .unwrap();
        assert_eq!(d.fap(id).unwrap().edge, Some(EdgeColor::X));
        assert!(son
            .admit_fap(&mut d, &mut g, &p, Point::new(1500.0, 0.0))
            .is_err());
    }

    #[test]
    fn sequential_admission_vs_one_shot() {
        let p = plan(Scheme::DynamicReuse);
        let params = DeploymentParams {
            femto_count: 2,
            reference_distance: None,
            ..Default::default()
        };
        let seeded = generate(Scenario::C, &params, 21).unwrap();
        let mut d = seeded.clone();
        d.faps.clear();
        let mut g = neighbor_graph(&d, 100.0).unwrap();
        let mut son = SonCoordinator::default();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        // 100 admissions packed into a 300 m disc so neighborhoods overlap.
        for _ in 0..100 {
            let p0 = loop {
                let x = rng.random_range(-300.0..300.0);
                let y = rng.random_range(-300.0..300.0);
                if x * x + y * y <= 300.0 * 300.0 && (x != 0.0 || y != 0.0) {
                    break Point::new(x, y);
                }
            };
            son.admit_fap(&mut d, &mut g, &p, p0).unwrap();
        }
        let sequential = ColoringState::from_deployment(&d, &g).conflict_count();
        assert_eq!(sequential, brute_conflicts(&d, &g));
        let mut one_shot = d.clone();
        let state = SonCoordinator::default()
            .configure_frequencies(&mut one_shot, &g, &p)
            .unwrap();
        assert_eq!(state.conflict_count(), brute_conflicts(&one_shot, &g));
        assert!(
            sequential >= state.conflict_count(),
            "{sequential} < {}",
            state.conflict_count()
        );

        let mut replayed = seeded;
        replayed.faps.clear();
        son.log().replay(&mut replayed).unwrap();
        assert_eq!(replayed, d);
    }

    #[test]
    fn replay_reproduces_state() {
        let params = DeploymentParams::default();
        let p = plan(Scheme::DynamicReuse);
        let prop = PropagationParams::default();
        let start = generate(Scenario::D, &params, 8).unwrap();
        let mut d = start.clone();
        let mut g = neighbor_graph(&d, 100.0).unwrap();
        let mut son = SonCoordinator::default();
        son.configure_frequencies(&mut d, &g, &p).unwrap();
        son.admit_fap(&mut d, &mut g, &p, Point::new(-120.0, 333.0))
            .unwrap();
        let ue = d.faps[0].position.toward(&Point::ORIGIN, 5.0);
        let victim = VictimUe {
            serving: FapId(0),
            position: ue,
            region: UeRegion::Edge,
        };
        son.adjust_power(&mut d, &g, &p, &victim, &prop, 40.0)
            .unwrap();

        let mut buf = Vec::new();
        son.log().write_ndjson(&mut buf).unwrap();
        let log = EventLog::read_ndjson(buf.as_slice()).unwrap();
        assert_eq!(&log, son.log());
        let mut copy = start;
        log.replay(&mut copy).unwrap();
        assert_eq!(copy, d);
    }

    #[test]
    fn ndjson_record_shape() {
        let (mut d, g) = layout(&[(300.0, 100.0), (340.0, 100.0)]);
        let mut son = SonCoordinator::default();
        son.configure_frequencies(&mut d, &g, &plan(Scheme::DynamicReuse))
            .unwrap();
        let mut buf = Vec::new();
        son.log().write_ndjson(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let first = text.lines().next().unwrap();
        assert_eq!(
            first,
            r#"{"seq":0,"subject":0,"kind":"Reconfigure","payload":{"edge":"X"}}"#
        );
        assert!(EventLog::read_ndjson(
            r#"{"seq":3,"subject":0,"kind":"Reconfigure","payload":{"edge":"X"}}"#.as_bytes()
        )
        .is_err());
    }
}
