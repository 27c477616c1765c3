//! Deployment geometry: the macro BS, its sectors, femto access points and
//! the neighbor graph between them.
//!
//! FAPs are placed uniformly over the macro disc by rejection sampling from
//! the bounding square, one point after another from a single seeded stream.
//! Growing `femto_count` under a fixed seed therefore only appends FAPs, which
//! keeps density sweeps nested. With uniform placement the number of FAPs
//! inside any fixed neighbor disc is binomial, i.e. Poisson in the limit.

use std::collections::HashMap;
use std::f64::consts::{PI, TAU};
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectrum::{EdgeColor, FemtoAllocation, FrequencyPlan};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn from_polar(radius: f64, angle: f64) -> Self {
        Self::new(radius * angle.cos(), radius * angle.sin())
    }

    pub fn distance(&self, other: &Point) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        (dx * dx + dy * dy).sqrt()
    }

    pub fn norm(&self) -> f64 {
        self.distance(&Point::ORIGIN)
    }

    /// Point at `distance` from `self` in the direction of `target`.
    pub fn toward(&self, target: &Point, distance: f64) -> Point {
        let d = self.distance(target);
        if d == 0.0 {
            return Point::new(self.x + distance, self.y);
        }
        Point::new(
            self.x + (target.x - self.x) * distance / d,
            self.y + (target.y - self.y) * distance / d,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FapId(pub u32);

impl FapId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for FapId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "fap{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MacroBs {
    pub position: Point,
    pub height: f64,
    pub tx_power: f64,
    pub radius: f64,
    pub n_sectors: usize,
}

impl MacroBs {
    pub fn covers(&self, p: &Point) -> bool {
        self.position.distance(p) <= self.radius
    }
}

/// Angular sector of `position` as seen from the macro BS. Sectors are equal
/// wedges counted counter-clockwise from the positive x axis.
pub fn sector_of(macro_bs: &MacroBs, position: &Point) -> Result<usize> {
    let dx = position.x - macro_bs.position.x;
    let dy = position.y - macro_bs.position.y;
    if dx == 0.0 && dy == 0.0 {
        return Err(Error::AtBaseStation);
    }
    let mut angle = dy.atan2(dx);
    if angle < 0.0 {
        angle += TAU;
    }
    let n = macro_bs.n_sectors.max(1);
    let wedge = TAU / n as f64;
    Ok(((angle / wedge).floor() as usize).min(n - 1))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fap {
    pub id: FapId,
    pub position: Point,
    pub height: f64,
    pub tx_power: f64,
    pub radius: f64,
    pub sector_index: usize,
    pub edge: Option<EdgeColor>,
}

impl Fap {
    pub fn allocation(&self, plan: &FrequencyPlan) -> Result<FemtoAllocation> {
        plan.allocation(self.sector_index, self.edge)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Scenario {
    /// Single femtocell, no overlaid macrocell.
    A,
    /// Stand-alone femtocells, pairwise non-neighbors, under a macrocell.
    B,
    /// A few overlapping femtocells under a macrocell.
    C,
    /// Dense femtocells under a macrocell.
    D,
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "A" | "a" => Ok(Scenario::A),
            "B" | "b" => Ok(Scenario::B),
            "C" | "c" => Ok(Scenario::C),
            "D" | "d" => Ok(Scenario::D),
            other => Err(Error::InvalidDeployment(format!(
                "unknown scenario `{other}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeploymentParams {
    pub macro_radius: f64,
    pub macro_height: f64,
    pub macro_tx_power: f64,
    pub n_sectors: usize,
    /// Total FAPs, the pinned reference FAP included.
    pub femto_count: usize,
    pub femto_radius: f64,
    pub fap_height: f64,
    pub fap_max_tx_power: f64,
    pub neighbor_radius: f64,
    /// Distance from the macro BS of the pinned reference FAP (id 0), placed
    /// on the bisector of sector 0. `None` places every FAP at random.
    pub reference_distance: Option<f64>,
    /// Minimum FAP count for scenario D.
    pub dense_threshold: usize,
    /// Resampling budget per FAP for scenario B separation.
    pub max_resample_attempts: usize,
}

impl Default for DeploymentParams {
    fn default() -> Self {
        Self {
            macro_radius: 1000.0,
            macro_height: 50.0,
            macro_tx_power: 1.5,
            n_sectors: 3,
            femto_count: 1000,
            femto_radius: 10.0,
            fap_height: 2.0,
            fap_max_tx_power: 0.01,
            neighbor_radius: 100.0,
            reference_distance: Some(200.0),
            dense_threshold: 1000,
            max_resample_attempts: 10_000,
        }
    }
}

impl DeploymentParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidDeployment(m));
        let positive = [
            ("macro_radius", self.macro_radius),
            ("macro_tx_power", self.macro_tx_power),
            ("femto_radius", self.femto_radius),
            ("fap_max_tx_power", self.fap_max_tx_power),
            ("neighbor_radius", self.neighbor_radius),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return bad(format!("{name} must be positive, got {v}"));
            }
        }
        if self.n_sectors == 0 {
            return bad("n_sectors must be at least 1".into());
        }
        if self.femto_count == 0 {
            return bad("femto_count must be at least 1".into());
        }
        if let Some(r) = self.reference_distance {
            if !(r > 0.0 && r <= self.macro_radius) {
                return bad(format!(
                    "reference distance {r} m must lie in (0, {}]",
                    self.macro_radius
                ));
            }
        }
        Ok(())
    }

    /// Expected neighbor count of an interior FAP, `density · π · r²`.
    pub fn expected_neighbors(&self) -> f64 {
        let density = self.femto_count as f64 / (PI * self.macro_radius * self.macro_radius);
        density * PI * self.neighbor_radius * self.neighbor_radius
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Deployment {
    pub macro_bs: Option<MacroBs>,
    pub faps: Vec<Fap>,
    pub scenario: Scenario,
    pub rng_seed: u64,
    pub params: DeploymentParams,
}

impl Deployment {
    pub fn fap(&self, id: FapId) -> Result<&Fap> {
        self.faps.get(id.index()).ok_or(Error::UnknownFap(id))
    }

    pub fn fap_mut(&mut self, id: FapId) -> Result<&mut Fap> {
        self.faps.get_mut(id.index()).ok_or(Error::UnknownFap(id))
    }

    pub fn len(&self) -> usize {
        self.faps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.faps.is_empty()
    }

    /// The FAP outage experiments are evaluated at.
    pub fn reference(&self) -> FapId {
        FapId(0)
    }

    pub fn clear_edges(&mut self) {
        for fap in &mut self.faps {
            fap.edge = None;
        }
    }

    fn new_fap(&self, id: usize, position: Point) -> Result<Fap> {
        let sector_index = match &self.macro_bs {
            Some(m) => sector_of(m, &position)?,
            None => 0,
        };
        Ok(Fap {
            id: FapId(id as u32),
            position,
            height: self.params.fap_height,
            tx_power: self.params.fap_max_tx_power,
            radius: self.params.femto_radius,
            sector_index,
            edge: None,
        })
    }

    /// Builds a FAP with default power and radius at `position`, without
    /// adding it.
    pub fn make_fap(&self, position: Point) -> Result<Fap> {
        if let Some(m) = &self.macro_bs {
            if !m.covers(&position) {
                return Err(Error::OutsideMacro {
                    x: position.x,
                    y: position.y,
                    radius: m.radius,
                });
            }
        }
        self.new_fap(self.faps.len(), position)
    }
}

fn uniform_in_disc(rng: &mut ChaCha8Rng, radius: f64) -> Point {
    loop {
        let x = rng.random_range(-radius..radius);
        let y = rng.random_range(-radius..radius);
        if x * x + y * y <= radius * radius && (x != 0.0 || y != 0.0) {
            return Point::new(x, y);
        }
    }
}

/// Generates a deployment for `scenario`.
///
/// Scenario A ignores `femto_count` and yields one FAP with no macro BS.
/// Scenario B resamples each FAP until it is farther than the neighbor
/// radius from every FAP already placed. C and D place FAPs uniformly; D
/// additionally requires at least `dense_threshold` FAPs.
pub fn generate(scenario: Scenario, params: &DeploymentParams, seed: u64) -> Result<Deployment> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    if scenario == Scenario::A {
        let mut deployment = Deployment {
            macro_bs: None,
            faps: Vec::new(),
            scenario,
            rng_seed: seed,
            params: params.clone(),
        };
        let fap = deployment.new_fap(0, Point::ORIGIN)?;
        deployment.faps.push(fap);
        return Ok(deployment);
    }

    match scenario {
        Scenario::D if params.femto_count < params.dense_threshold => {
            return Err(Error::InvalidDeployment(format!(
                "scenario D needs at least {} FAPs, got {}",
                params.dense_threshold, params.femto_count
            )));
        }
        Scenario::C if params.femto_count < 2 => {
            return Err(Error::InvalidDeployment(
                "scenario C needs at least two FAPs".into(),
            ));
        }
        _ => {}
    }

    let macro_bs = MacroBs {
        position: Point::ORIGIN,
        height: params.macro_height,
        tx_power: params.macro_tx_power,
        radius: params.macro_radius,
        n_sectors: params.n_sectors,
    };
    let mut positions: Vec<Point> = Vec::with_capacity(params.femto_count);
    if let Some(r) = params.reference_distance {
        positions.push(Point::from_polar(r, PI / params.n_sectors as f64));
    }
    while positions.len() < params.femto_count {
        if scenario == Scenario::B {
            let mut attempts = 0;
            let p = loop {
                let candidate = uniform_in_disc(&mut rng, params.macro_radius);
                if positions
                    .iter()
                    .all(|q| q.distance(&candidate) > params.neighbor_radius)
                {
                    break candidate;
                }
                attempts += 1;
                if attempts >= params.max_resample_attempts {
                    return Err(Error::InfeasiblePacking {
                        placed: positions.len(),
                        requested: params.femto_count,
                        attempts,
                    });
                }
            };
            positions.push(p);
        } else {
            positions.push(uniform_in_disc(&mut rng, params.macro_radius));
        }
    }

    let mut deployment = Deployment {
        macro_bs: Some(macro_bs),
        faps: Vec::with_capacity(positions.len()),
        scenario,
        rng_seed: seed,
        params: params.clone(),
    };
    for (i, p) in positions.into_iter().enumerate() {
        let fap = deployment.new_fap(i, p)?;
        deployment.faps.push(fap);
    }
    Ok(deployment)
}

/// Symmetric, irreflexive adjacency over FAP ids: `a` and `b` are neighbors
/// iff their center-to-center distance is at most `neighbor_radius`.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborGraph {
    adjacency: Vec<Vec<FapId>>,
    neighbor_radius: f64,
}

impl NeighborGraph {
    pub fn neighbor_radius(&self) -> f64 {
        self.neighbor_radius
    }

    pub fn len(&self) -> usize {
        self.adjacency.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adjacency.is_empty()
    }

    /// Sorted neighbor ids of `id`; empty for unknown ids.
    pub fn neighbors(&self, id: FapId) -> &[FapId] {
        self.adjacency.get(id.index()).map_or(&[], Vec::as_slice)
    }

    pub fn degree(&self, id: FapId) -> usize {
        self.neighbors(id).len()
    }

    pub fn contains_edge(&self, a: FapId, b: FapId) -> bool {
        self.neighbors(a).binary_search(&b).is_ok()
    }

    /// Each undirected edge once, as `(low, high)`.
    pub fn edges(&self) -> impl Iterator<Item = (FapId, FapId)> + '_ {
        self.adjacency.iter().enumerate().flat_map(|(i, ns)| {
            let a = FapId(i as u32);
            ns.iter().filter(move |b| a < **b).map(move |b| (a, *b))
        })
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn mean_degree(&self) -> f64 {
        if self.adjacency.is_empty() {
            return 0.0;
        }
        2.0 * self.edge_count() as f64 / self.adjacency.len() as f64
    }

    /// Adds the last FAP of `deployment` to the graph, linking it to every
    /// FAP within the neighbor radius.
    pub fn insert_last(&mut self, deployment: &Deployment) -> Result<Vec<FapId>> {
        let new = deployment
            .faps
            .last()
            .ok_or_else(|| Error::InvalidDeployment("deployment has no FAPs".into()))?;
        if new.id.index() != self.adjacency.len() {
            return Err(Error::InvalidDeployment(format!(
                "graph has {} nodes but the new FAP is {}",
                self.adjacency.len(),
                new.id
            )));
        }
        let found: Vec<FapId> = deployment.faps[..deployment.faps.len() - 1]
            .iter()
            .filter(|f| f.position.distance(&new.position) <= self.neighbor_radius)
            .map(|f| f.id)
            .collect();
        for n in &found {
            let list = &mut self.adjacency[n.index()];
            let at = list.binary_search(&new.id).unwrap_or_else(|e| e);
            list.insert(at, new.id);
        }
        self.adjacency.push(found.clone());
        Ok(found)
    }
}

/// Builds the neighbor graph using a uniform grid with cell size `radius`,
/// so only the 3×3 surrounding cells are scanned per FAP.
pub fn neighbor_graph(deployment: &Deployment, radius: f64) -> Result<NeighborGraph> {
    if !(radius.is_finite() && radius > 0.0) {
        return Err(Error::InvalidDeployment(format!(
            "neighbor radius must be positive, got {radius}"
        )));
    }
    let cell = |p: &Point| ((p.x / radius).floor() as i64, (p.y / radius).floor() as i64);
    let mut grid: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    for (i, fap) in deployment.faps.iter().enumerate() {
        grid.entry(cell(&fap.position)).or_default().push(i);
    }
    let mut adjacency = vec![Vec::new(); deployment.faps.len()];
    for (i, fap) in deployment.faps.iter().enumerate() {
        let (cx, cy) = cell(&fap.position);
        for gx in cx - 1..=cx + 1 {
            for gy in cy - 1..=cy + 1 {
                let Some(members) = grid.get(&(gx, gy)) else {
                    continue;
                };
                for &j in members {
                    if j != i && fap.position.distance(&deployment.faps[j].position) <= radius {
                        adjacency[i].push(FapId(j as u32));
                    }
                }
            }
        }
        adjacency[i].sort_unstable();
    }
    Ok(NeighborGraph {
        adjacency,
        neighbor_radius: radius,
    })
}

/// Classifies a deployment by the default thresholds: no macro → A; no
/// neighboring pair → B; at least `dense_threshold` FAPs → D; mean degree
/// below 2 → C. Anything else matches no scenario.
pub fn classify(deployment: &Deployment, graph: &NeighborGraph) -> Option<Scenario> {
    if deployment.macro_bs.is_none() {
        return (deployment.faps.len() == 1).then_some(Scenario::A);
    }
    if graph.edge_count() == 0 {
        return Some(Scenario::B);
    }
    if deployment.faps.len() >= deployment.params.dense_threshold {
        return Some(Scenario::D);
    }
    (graph.mean_degree() < 2.0).then_some(Scenario::C)
}

const CSV_COLUMNS: [&str; 7] = [
    "id",
    "x",
    "y",
    "sector",
    "tx_power",
    "edge_choice",
    "radius",
];

/// Writes the deployment as CSV. Scenario, seed, macro BS and generation
/// parameters go into `#`-prefixed header lines so the file loads back
/// exactly.
pub fn write_csv<W: Write>(deployment: &Deployment, mut out: W) -> Result<()> {
    let p = &deployment.params;
    writeln!(out, "# scenario={}", deployment.scenario)?;
    writeln!(out, "# seed={}", deployment.rng_seed)?;
    match &deployment.macro_bs {
        Some(m) => writeln!(
            out,
            "# macro={},{},{},{},{},{}",
            m.position.x, m.position.y, m.height, m.tx_power, m.radius, m.n_sectors
        )?,
        None => writeln!(out, "# macro=none")?,
    }
    writeln!(
        out,
        "# params={},{},{},{},{},{},{},{},{},{},{},{}",
        p.macro_radius,
        p.macro_height,
        p.macro_tx_power,
        p.n_sectors,
        p.femto_count,
        p.femto_radius,
        p.fap_height,
        p.fap_max_tx_power,
        p.neighbor_radius,
        p.reference_distance
            .map_or("none".to_string(), |r| r.to_string()),
        p.dense_threshold,
        p.max_resample_attempts
    )?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_COLUMNS)?;
    for f in &deployment.faps {
        w.write_record([
            f.id.0.to_string(),
            f.position.x.to_string(),
            f.position.y.to_string(),
            f.sector_index.to_string(),
            f.tx_power.to_string(),
            f.edge.map_or("none".to_string(), |c| c.to_string()),
            f.radius.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn parse_field<T: FromStr>(value: &str, what: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::DeploymentCsv(format!("bad {what}: `{value}`")))
}

pub fn read_csv<R: BufRead>(input: R) -> Result<Deployment> {
    let mut scenario = None;
    let mut seed = None;
    let mut macro_bs: Option<Option<MacroBs>> = None;
    let mut params = None;
    let mut body = String::new();
    for line in input.lines() {
        let line = line?;
        let Some(meta) = line.strip_prefix('#') else {
            body.push_str(&line);
            body.push('\n');
            continue;
        };
        let Some((key, value)) = meta.trim().split_once('=') else {
            continue;
        };
        let fields: Vec<&str> = value.split(',').collect();
        match key {
            "scenario" => scenario = Some(value.parse::<Scenario>()?),
            "seed" => seed = Some(parse_field::<u64>(value, "seed")?),
            "macro" if value == "none" => macro_bs = Some(None),
            "macro" => {
                if fields.len() != 6 {
                    return Err(Error::DeploymentCsv(format!("bad macro line `{value}`")));
                }
                macro_bs = Some(Some(MacroBs {
                    position: Point::new(
                        parse_field(fields[0], "x")?,
                        parse_field(fields[1], "y")?,
                    ),
                    height: parse_field(fields[2], "height")?,
                    tx_power: parse_field(fields[3], "tx_power")?,
                    radius: parse_field(fields[4], "radius")?,
                    n_sectors: parse_field(fields[5], "n_sectors")?,
                }));
            }
            "params" => {
                if fields.len() != 12 {
                    return Err(Error::DeploymentCsv(format!("bad params line `{value}`")));
                }
                params = Some(DeploymentParams {
                    macro_radius: parse_field(fields[0], "macro_radius")?,
                    macro_height: parse_field(fields[1], "macro_height")?,
                    macro_tx_power: parse_field(fields[2], "macro_tx_power")?,
                    n_sectors: parse_field(fields[3], "n_sectors")?,
                    femto_count: parse_field(fields[4], "femto_count")?,
                    femto_radius: parse_field(fields[5], "femto_radius")?,
                    fap_height: parse_field(fields[6], "fap_height")?,
                    fap_max_tx_power: parse_field(fields[7], "fap_max_tx_power")?,
                    neighbor_radius: parse_field(fields[8], "neighbor_radius")?,
                    reference_distance: match fields[9] {
                        "none" => None,
                        r => Some(parse_field(r, "reference_distance")?),
                    },
                    dense_threshold: parse_field(fields[10], "dense_threshold")?,
                    max_resample_attempts: parse_field(fields[11], "max_resample_attempts")?,
                });
            }
            _ => {}
        }
    }
    let missing = |k: &str| Error::DeploymentCsv(format!("missing `# {k}=` header line"));
    let params = params.ok_or_else(|| missing("params"))?;

    let mut reader = csv::Reader::from_reader(body.as_bytes());
    let headers = reader.headers()?.clone();
    if headers.iter().ne(CSV_COLUMNS) {
        return Err(Error::DeploymentCsv(format!(
            "unexpected columns {headers:?}"
        )));
    }
    let mut faps = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let r = record?;
        let id: u32 = parse_field(&r[0], "id")?;
        if id as usize != row {
            return Err(Error::DeploymentCsv(format!(
                "FAP ids must be 0..n, got {id} at row {row}"
            )));
        }
        let edge = match &r[5] {
            "none" => None,
            "X" => Some(EdgeColor::X),
            "Y" => Some(EdgeColor::Y),
            "Z" => Some(EdgeColor::Z),
            other => return Err(Error::DeploymentCsv(format!("bad edge choice `{other}`"))),
        };
        faps.push(Fap {
            id: FapId(id),
            position: Point::new(parse_field(&r[1], "x")?, parse_field(&r[2], "y")?),
            height: params.fap_height,
            tx_power: parse_field(&r[4], "tx_power")?,
            radius: parse_field(&r[6], "radius")?,
            sector_index: parse_field(&r[3], "sector")?,
            edge,
        });
    }
    Ok(Deployment {
        macro_bs: macro_bs.ok_or_else(|| missing("macro"))?,
        faps,
        scenario: scenario.ok_or_else(|| missing("scenario"))?,
        rng_seed: seed.ok_or_else(|| missing("seed"))?,
        params,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn macro3() -> MacroBs {
        MacroBs {
            position: Point::ORIGIN,
            height: 50.0,
            tx_power: 1.5,
            radius: 1000.0,
            n_sectors: 3,
        }
    }

    #[test]
    fn sector_wedges() {
        let m = macro3();
        assert_eq!(sector_of(&m, &Point::from_polar(10.0, 0.0)).unwrap(), 0);
        assert_eq!(sector_of(&m, &Point::new(-10.0, 0.0)).unwrap(), 1);
        let almost = Point::new(100.0, -1e-12);
        assert_eq!(sector_of(&m, &almost).unwrap(), 2);
        assert!(matches!(
            sector_of(&m, &Point::ORIGIN),
            Err(Error::AtBaseStation)
        ));
    }

    #[test]
    fn rotation_permutes_sectors() {
        let m = macro3();
        let wedge = TAU / 3.0;
        for k in 0..300 {
            // Stay away from wedge boundaries where rounding could flip the result.
            let angle = 0.05 + k as f64 * 0.0209;
            if (angle / wedge).fract() > 0.99 {
                continue;
            }
            let s = sector_of(&m, &Point::from_polar(300.0, angle)).unwrap();
            let r = sector_of(&m, &Point::from_polar(300.0, angle + wedge)).unwrap();
            assert_eq!(r, (s + 1) % 3);
        }
    }

    #[test]
    fn scenario_a_is_isolated() {
        let d = generate(Scenario::A, &DeploymentParams::default(), 1).unwrap();
        assert!(d.macro_bs.is_none());
        assert_eq!(d.faps.len(), 1);
        let g = neighbor_graph(&d, 100.0).unwrap();
        assert_eq!(g.edge_count(), 0);
        assert_eq!(classify(&d, &g), Some(Scenario::A));
    }

    #[test]
    fn dense_deployment_inside_disc() {
        let params = DeploymentParams::default();
        let d = generate(Scenario::D, &params, 42).unwrap();
        assert_eq!(d.faps.len(), 1000);
        let m = d.macro_bs.unwrap();
        for f in &d.faps {
            assert!(f.position.norm() <= 1000.0);
            assert_eq!(f.sector_index, sector_of(&m, &f.position).unwrap());
            assert_eq!(f.tx_power, 0.01);
        }
        assert!((d.faps[0].position.norm() - 200.0).abs() < 1e-9);
        assert_eq!(d.faps[0].sector_index, 0);
        let g = neighbor_graph(&d, 100.0).unwrap();
        assert_eq!(classify(&d, &g), Some(Scenario::D));
    }

    #[test]
    fn dense_threshold_enforced() {
        let params = DeploymentParams {
            femto_count: 999,
            ..Default::default()
        };
        assert!(generate(Scenario::D, &params, 0).is_err());
    }

    #[test]
    fn deterministic_and_nested() {
        let params = DeploymentParams::default();
        let a = generate(Scenario::D, &params, 7).unwrap();
        let b = generate(Scenario::D, &params, 7).unwrap();
        assert_eq!(a, b);
        let small = generate(
            Scenario::C,
            &DeploymentParams {
                femto_count: 300,
                ..params.clone()
            },
            7,
        )
        .unwrap();
        assert_eq!(small.faps[..], a.faps[..300]);
    }

    #[test]
    fn scenario_b_separation() {
        let params = DeploymentParams {
            femto_count: 40,
            ..Default::default()
        };
        let d = generate(Scenario::B, &params, 3).unwrap();
        let g = neighbor_graph(&d, params.neighbor_radius).unwrap();
        assert_eq!(g.edge_count(), 0);
        assert_eq!(classify(&d, &g), Some(Scenario::B));
    }

    #[test]
    fn scenario_b_infeasible() {
        let params = DeploymentParams {
            femto_count: 500,
            max_resample_attempts: 200,
            ..Default::default()
        };
        assert!(matches!(
            generate(Scenario::B, &params, 3),
            Err(Error::InfeasiblePacking { requested: 500, .. })
        ));
    }

    fn two_faps(distance: f64) -> Deployment {
        let mut d = generate(
            Scenario::C,
            &DeploymentParams {
                femto_count: 2,
                ..Default::default()
            },
            0,
        )
        .unwrap();
        d.faps[0].position = Point::new(300.0, 10.0);
        d.faps[1].position = Point::new(300.0 + distance, 10.0);
        d
    }

    #[test]
    fn neighbor_threshold() {
        let g = neighbor_graph(&two_faps(99.0), 100.0).unwrap();
        assert!(g.contains_edge(FapId(0), FapId(1)));
        assert!(g.contains_edge(FapId(1), FapId(0)));
        let g = neighbor_graph(&two_faps(101.0), 100.0).unwrap();
        assert_eq!(g.edge_count(), 0);
        assert!(neighbor_graph(&two_faps(1.0), 0.0).is_err());
    }

    #[test]
    fn insert_last_matches_rebuild() {
        let params = DeploymentParams {
            femto_count: 400,
            ..Default::default()
        };
        let mut d = generate(Scenario::C, &params, 9).unwrap();
        let mut g = neighbor_graph(&d, 100.0).unwrap();
        let fap = d.make_fap(Point::new(150.0, 120.0)).unwrap();
        d.faps.push(fap);
        g.insert_last(&d).unwrap();
        assert_eq!(g, neighbor_graph(&d, 100.0).unwrap());
        assert!(d.make_fap(Point::new(2000.0, 0.0)).is_err());
    }

    #[test]
    fn csv_roundtrip_exact() {
        let params = DeploymentParams {
            femto_count: 50,
            ..Default::default()
        };
        let mut d = generate(Scenario::C, &params, 5).unwrap();
        d.faps[3].edge = Some(EdgeColor::Y);
        d.faps[4].tx_power = 0.01 * 10f64.powf(-0.1);
        d.faps[4].radius = 10.0 * 10f64.powf(-0.05);
        let mut buf = Vec::new();
        write_csv(&d, &mut buf).unwrap();
        let back = read_csv(buf.as_slice()).unwrap();
        assert_eq!(back, d);

        let a = generate(Scenario::A, &params, 5).unwrap();
        let mut buf = Vec::new();
        write_csv(&a, &mut buf).unwrap();
        assert_eq!(read_csv(buf.as_slice()).unwrap(), a);
    }

    #[test]
    fn csv_rejects_garbage() {
        assert!(read_csv("id,x\n1,2\n".as_bytes()).is_err());
    }
}
