//! Frequency bands and the per-scheme partition of the cellular band.
//!
//! Bands are half-open integer intervals `[lower, upper)` in Hz, so every
//! partition below can be checked exactly. A [`FrequencyPlan`] records, for
//! each macrocell sector, the band the macro BS transmits on and the bands
//! the femtocells inside that sector may use.
//!
//! Under [`Scheme::DynamicReuse`] the total band is split into `N` equal
//! sector bands. Femtocells in sector `s` never touch band `s`: they share
//! band `s + 1` as a common center band, and band `s + 2` is cut into three
//! edge slices (`X`, `Y`, `Z`) of which each femtocell picks at most one.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Half-open frequency interval `[lower, upper)` in Hz.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Band {
    lower: u64,
    upper: u64,
}

impl Band {
    pub fn new(lower: u64, upper: u64) -> Result<Self> {
        if upper <= lower {
            return Err(Error::EmptyBand { lower, upper });
        }
        Ok(Self { lower, upper })
    }

    pub fn lower(&self) -> u64 {
        self.lower
    }

    pub fn upper(&self) -> u64 {
        self.upper
    }

    pub fn width(&self) -> u64 {
        self.upper - self.lower
    }

    pub fn contains(&self, freq_hz: u64) -> bool {
        self.lower <= freq_hz && freq_hz < self.upper
    }

    pub fn intersects(&self, other: &Band) -> bool {
        self.lower < other.upper && other.lower < self.upper
    }

    /// True when `other` lies entirely inside `self`.
    pub fn covers(&self, other: &Band) -> bool {
        self.lower <= other.lower && other.upper <= self.upper
    }

    /// Splits into `n` contiguous pieces whose widths differ by at most 1 Hz.
    pub fn split_equal(&self, n: usize) -> Result<Vec<Band>> {
        if n == 0 || (n as u64) > self.width() {
            return Err(Error::InvalidPlan(format!(
                "cannot split a {} Hz band into {n} non-empty pieces",
                self.width()
            )));
        }
        let width = self.width() as u128;
        let edge = |k: usize| self.lower + (width * k as u128 / n as u128) as u64;
        (0..n).map(|k| Band::new(edge(k), edge(k + 1))).collect()
    }

    /// The lowest `width` Hz of this band.
    fn bottom(&self, width: u64) -> Result<Band> {
        Band::new(self.lower, self.lower + width)
    }

    /// Everything above the lowest `width` Hz.
    fn above(&self, width: u64) -> Result<Band> {
        Band::new(self.lower + width, self.upper)
    }
}

impl fmt::Display for Band {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.lower, self.upper)
    }
}

impl FromStr for Band {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidPlan(format!("expected `lower..upper` in Hz, got `{s}`"));
        let (lo, hi) = s.trim().split_once("..").ok_or_else(bad)?;
        let lo = lo.trim().parse().map_err(|_| bad())?;
        let hi = hi.trim().parse().map_err(|_| bad())?;
        Band::new(lo, hi)
    }
}

/// Frequency allocation scheme for the femto/macro overlay.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Scheme {
    /// Femtocells and macrocell on disjoint bands; all femtocells share one band.
    Dedicated,
    /// Femtocells and macrocell share the whole band.
    Same,
    /// Macrocell uses the whole band, femtocells a low sub-band of it.
    Partial,
    /// Sectorised re-use with shared center band and per-femtocell edge slice.
    DynamicReuse,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [
        Scheme::Dedicated,
        Scheme::Same,
        Scheme::Partial,
        Scheme::DynamicReuse,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Scheme::Dedicated => "dedicated",
            Scheme::Same => "same",
            Scheme::Partial => "partial",
            Scheme::DynamicReuse => "dynamic",
        }
    }

    pub fn has_edge_bands(&self) -> bool {
        matches!(self, Scheme::DynamicReuse)
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "dedicated" => Ok(Scheme::Dedicated),
            "same" => Ok(Scheme::Same),
            "partial" => Ok(Scheme::Partial),
            "dynamic" | "dynamic-reuse" | "dynamicreuse" => Ok(Scheme::DynamicReuse),
            other => Err(Error::InvalidPlan(format!("unknown scheme `{other}`"))),
        }
    }
}

/// One of the three edge slices a femtocell may pick under dynamic re-use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EdgeColor {
    X,
    Y,
    Z,
}

impl EdgeColor {
    pub const ALL: [EdgeColor; 3] = [EdgeColor::X, EdgeColor::Y, EdgeColor::Z];

    pub fn index(self) -> usize {
        match self {
            EdgeColor::X => 0,
            EdgeColor::Y => 1,
            EdgeColor::Z => 2,
        }
    }

    pub fn from_index(index: usize) -> Option<Self> {
        Self::ALL.get(index).copied()
    }
}

impl fmt::Display for EdgeColor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            EdgeColor::X => "X",
            EdgeColor::Y => "Y",
            EdgeColor::Z => "Z",
        };
        f.write_str(s)
    }
}

/// Where the served UE sits inside its femtocell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum UeRegion {
    Center,
    Edge,
}

impl UeRegion {
    /// UEs at or beyond the inner-circle radius are edge UEs.
    pub fn classify(ue_distance: f64, inner_radius: f64) -> Self {
        if ue_distance < inner_radius {
            UeRegion::Center
        } else {
            UeRegion::Edge
        }
    }
}

impl fmt::Display for UeRegion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            UeRegion::Center => "center",
            UeRegion::Edge => "edge",
        })
    }
}

impl FromStr for UeRegion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "center" | "centre" => Ok(UeRegion::Center),
            "edge" => Ok(UeRegion::Edge),
            other => Err(Error::InvalidOutageConfig(format!(
                "unknown UE region `{other}`"
            ))),
        }
    }
}

/// The bands one femtocell transmits on. `edge` is `None` when no edge slice
/// is selected, so at most one of the three slices can ever be chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FemtoAllocation {
    pub center: Band,
    pub edge: Option<EdgeColor>,
    pub sector_index: usize,
}

/// The other end of a potential co-channel link.
#[derive(Debug, Clone, Copy)]
pub enum Interferer<'a> {
    Femto(&'a FemtoAllocation),
    /// The overlaying macrocell sector.
    Macro {
        sector: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyPlan {
    scheme: Scheme,
    total: Band,
    macro_sector_bands: Vec<Band>,
    center_band_per_sector: Vec<Band>,
    edge_bands_per_sector: Vec<[Band; 3]>,
    femto_band_fraction: Option<f64>,
    edge_split: Option<f64>,
}

/// Fraction of a sector's femto spectrum given to edge slices when the
/// whole second non-local band is sliced.
pub const DEFAULT_EDGE_SPLIT: f64 = 0.5;

/// Builds the allocation of `total_band` for `scheme`.
///
/// `femto_fraction` is only read for [`Scheme::Dedicated`] and
/// [`Scheme::Partial`]; `edge_split` only for [`Scheme::DynamicReuse`], where
/// it is the share of the sector's femto spectrum (center + edge) reserved
/// for the three edge slices. It cannot exceed one half because the slices
/// live inside a single sector band.
pub fn build_plan(
    scheme: Scheme,
    total_band: Band,
    n_sectors: usize,
    femto_fraction: f64,
    edge_split: f64,
) -> Result<FrequencyPlan> {
    if n_sectors == 0 {
        return Err(Error::InvalidPlan("at least one sector is required".into()));
    }
    let total_width = total_band.width();
    let femto_width = || -> Result<u64> {
        if !(femto_fraction > 0.0 && femto_fraction < 1.0) {
            return Err(Error::InvalidPlan(format!(
                "femto fraction must lie in (0, 1), got {femto_fraction}"
            )));
        }
        let w = (femto_fraction * total_width as f64).round() as u64;
        if w == 0 || w >= total_width {
            return Err(Error::InvalidPlan(format!(
                "femto fraction {femto_fraction} leaves an empty band"
            )));
        }
        Ok(w)
    };

    let (macro_sector_bands, center_band_per_sector, edge_bands_per_sector, fraction) = match scheme
    {
        Scheme::Dedicated => {
            let w = femto_width()?;
            let femto = total_band.bottom(w)?;
            let macro_band = total_band.above(w)?;
            (
                vec![macro_band; n_sectors],
                vec![femto; n_sectors],
                Vec::new(),
                Some(femto_fraction),
            )
        }
        Scheme::Same => (
            vec![total_band; n_sectors],
            vec![total_band; n_sectors],
            Vec::new(),
            None,
        ),
        Scheme::Partial => {
            let w = femto_width()?;
            let femto = total_band.bottom(w)?;
            (
                vec![total_band; n_sectors],
                vec![femto; n_sectors],
                Vec::new(),
                Some(femto_fraction),
            )
        }
        Scheme::DynamicReuse => {
            if n_sectors < 3 {
                return Err(Error::InvalidPlan(format!(
                    "dynamic re-use needs at least 3 sectors, got {n_sectors}"
                )));
            }
            if !(edge_split > 0.0 && edge_split <= DEFAULT_EDGE_SPLIT) {
                return Err(Error::InvalidPlan(format!(
                    "edge split must lie in (0, 0.5], got {edge_split}"
                )));
            }
            let sectors = total_band.split_equal(n_sectors)?;
            let mut centers = Vec::with_capacity(n_sectors);
            let mut edges = Vec::with_capacity(n_sectors);
            for s in 0..n_sectors {
                let center = sectors[(s + 1) % n_sectors];
                let host = sectors[(s + 2) % n_sectors];
                let wanted = (edge_split * (center.width() + host.width()) as f64).round() as u64;
                let slices = host.bottom(wanted.min(host.width()))?.split_equal(3)?;
                centers.push(center);
                edges.push([slices[0], slices[1], slices[2]]);
            }
            (sectors, centers, edges, None)
        }
    };

    Ok(FrequencyPlan {
        scheme,
        total: total_band,
        macro_sector_bands,
        center_band_per_sector,
        edge_bands_per_sector,
        femto_band_fraction: fraction,
        edge_split: scheme.has_edge_bands().then_some(edge_split),
    })
}

impl FrequencyPlan {
    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn total_band(&self) -> Band {
        self.total
    }

    pub fn n_sectors(&self) -> usize {
        self.macro_sector_bands.len()
    }

    pub fn macro_sector_bands(&self) -> &[Band] {
        &self.macro_sector_bands
    }

    pub fn center_band_per_sector(&self) -> &[Band] {
        &self.center_band_per_sector
    }

    pub fn edge_bands_per_sector(&self) -> &[[Band; 3]] {
        &self.edge_bands_per_sector
    }

    pub fn femto_band_fraction(&self) -> Option<f64> {
        self.femto_band_fraction
    }

    /// Number of distinct macro sub-bands.
    pub fn p(&self) -> usize {
        let mut bands = self.macro_sector_bands.clone();
        bands.sort();
        bands.dedup();
        bands.len()
    }

    /// Femto sub-bands available inside one sector: the center band plus any
    /// edge slices.
    pub fn q(&self) -> usize {
        if self.scheme.has_edge_bands() {
            4
        } else {
            1
        }
    }

    pub fn macro_band(&self, sector: usize) -> Result<Band> {
        self.check_sector(sector)?;
        Ok(self.macro_sector_bands[sector])
    }

    pub fn edge_band(&self, sector: usize, color: EdgeColor) -> Result<Option<Band>> {
        self.check_sector(sector)?;
        Ok(self
            .edge_bands_per_sector
            .get(sector)
            .map(|slices| slices[color.index()]))
    }

    /// The allocation a femtocell in `sector` with edge choice `edge` gets.
    /// Schemes without edge slices drop the edge choice.
    pub fn allocation(&self, sector: usize, edge: Option<EdgeColor>) -> Result<FemtoAllocation> {
        self.check_sector(sector)?;
        Ok(FemtoAllocation {
            center: self.center_band_per_sector[sector],
            edge: if self.scheme.has_edge_bands() {
                edge
            } else {
                None
            },
            sector_index: sector,
        })
    }

    fn check_sector(&self, sector: usize) -> Result<()> {
        if sector >= self.n_sectors() {
            return Err(Error::SectorOutOfRange {
                index: sector,
                n_sectors: self.n_sectors(),
            });
        }
        Ok(())
    }

    /// Band that serves a UE in `region` of a femtocell with `alloc`.
    pub fn serving_band(&self, alloc: &FemtoAllocation, region: UeRegion) -> Result<Band> {
        self.check_sector(alloc.sector_index)?;
        match (region, alloc.edge) {
            (UeRegion::Edge, Some(color)) => Ok(self
                .edge_band(alloc.sector_index, color)?
                .unwrap_or(alloc.center)),
            _ => Ok(alloc.center),
        }
    }

    /// Serialises the plan as a line-oriented `key=value` block.
    pub fn to_config_block(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("scheme={}\n", self.scheme));
        out.push_str(&format!("total_band={}\n", self.total));
        out.push_str(&format!("n_sectors={}\n", self.n_sectors()));
        if let Some(f) = self.femto_band_fraction {
            out.push_str(&format!("femto_fraction={f}\n"));
        }
        if let Some(split) = self.edge_split {
            out.push_str(&format!("edge_split={split}\n"));
        }
        for s in 0..self.n_sectors() {
            out.push_str(&format!(
                "sector.{s}.macro={}\n",
                self.macro_sector_bands[s]
            ));
            out.push_str(&format!(
                "sector.{s}.center={}\n",
                self.center_band_per_sector[s]
            ));
            if let Some(slices) = self.edge_bands_per_sector.get(s) {
                for color in EdgeColor::ALL {
                    let key = color.to_string().to_ascii_lowercase();
                    out.push_str(&format!(
                        "sector.{s}.edge.{key}={}\n",
                        slices[color.index()]
                    ));
                }
            }
        }
        out
    }

    /// Rebuilds a plan from [`to_config_block`](Self::to_config_block)
    /// output and checks every listed band against the rebuilt plan.
    pub fn from_config_block(block: &str) -> Result<Self> {
        let mut scheme = None;
        let mut total = None;
        let mut n_sectors = None;
        let mut fraction = 0.5;
        let mut edge_split = DEFAULT_EDGE_SPLIT;
        let mut bands = Vec::new();
        for line in block.lines().map(str::trim).filter(|l| !l.is_empty()) {
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::InvalidPlan(format!("expected key=value, got `{line}`")))?;
            let num_err = || Error::InvalidPlan(format!("bad value for {key}: `{value}`"));
            match key {
                "scheme" => scheme = Some(value.parse()?),
                "total_band" => total = Some(value.parse()?),
                "n_sectors" => n_sectors = Some(value.parse().map_err(|_| num_err())?),
                "femto_fraction" => fraction = value.parse().map_err(|_| num_err())?,
                "edge_split" => edge_split = value.parse().map_err(|_| num_err())?,
                k if k.starts_with("sector.") => {
                    bands.push((k.to_string(), value.parse::<Band>()?))
                }
                other => return Err(Error::InvalidPlan(format!("unknown plan key `{other}`"))),
            }
        }
        let missing = |k: &str| Error::InvalidPlan(format!("plan block is missing `{k}`"));
        let plan = build_plan(
            scheme.ok_or_else(|| missing("scheme"))?,
            total.ok_or_else(|| missing("total_band"))?,
            n_sectors.ok_or_else(|| missing("n_sectors"))?,
            fraction,
            edge_split,
        )?;
        let expected = plan.to_config_block();
        for (key, band) in bands {
            let line = format!("{key}={band}");
            if !expected.lines().any(|l| l == line) {
                return Err(Error::InvalidPlan(format!(
                    "band `{line}` does not match the plan"
                )));
            }
        }
        Ok(plan)
    }
}

/// Bands a femtocell with `alloc` transmits on: its center band plus the
/// selected edge slice, if any.
pub fn bands_for_femto(plan: &FrequencyPlan, alloc: &FemtoAllocation) -> Result<Vec<Band>> {
    plan.check_sector(alloc.sector_index)?;
    let mut bands = vec![alloc.center];
    if let Some(color) = alloc.edge {
        if let Some(edge) = plan.edge_band(alloc.sector_index, color)? {
            bands.push(edge);
        }
    }
    Ok(bands)
}

/// Co-channel indicator between the band serving the reference UE and an
/// interferer.
///
/// For the macro sector this is `Y`: whether the serving band overlaps the
/// sector's macro band. For another femtocell this is `X_i`: whether the
/// serving band overlaps any band that femtocell transmits on. Bands are
/// treated as orthogonal when they do not overlap; invalid sector indices
/// never overlap anything.
pub fn cochannel(
    plan: &FrequencyPlan,
    alloc_ref: &FemtoAllocation,
    ue_region: UeRegion,
    other: Interferer<'_>,
) -> bool {
    let Ok(serving) = plan.serving_band(alloc_ref, ue_region) else {
        return false;
    };
    match other {
        Interferer::Macro { sector } => plan
            .macro_sector_bands
            .get(sector)
            .is_some_and(|b| b.intersects(&serving)),
        Interferer::Femto(alloc) => bands_for_femto(plan, alloc)
            .map(|bands| bands.iter().any(|b| b.intersects(&serving)))
            .unwrap_or(false),
    }
}
