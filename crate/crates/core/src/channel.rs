//! Received powers on the desired and interfering downlinks.
//!
//! Every link follows `P_R = P_T · P_0 · d^(-η) · ξ · Z` with `ξ` (slow) and
//! `Z` (fast) unit-mean exponential fading. The desired link carries only
//! fast fading. Femto interferers additionally pass through the configured
//! number of walls. All powers are linear watts.

use rand::Rng;
use rand_distr::Exp1;

use crate::error::{Error, Result};
use crate::spectrum::{cochannel, FrequencyPlan, Interferer, UeRegion};
use crate::topology::{Deployment, Fap, FapId, NeighborGraph, Point};

const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Free-space `(λ / 4π)²` gain at 1 m.
pub fn free_space_p0(carrier_hz: f64) -> f64 {
    let lambda = SPEED_OF_LIGHT / carrier_hz;
    (lambda / (4.0 * std::f64::consts::PI)).powi(2)
}

/// `P_0` such that the mean path loss at `distance_m` equals `loss_db`.
pub fn p0_for_loss_at(loss_db: f64, distance_m: f64, eta: f64) -> f64 {
    db_to_linear(-loss_db) * distance_m.powf(eta)
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropagationParams {
    pub carrier_hz: f64,
    /// Serving FAP to its own UE.
    pub eta_desired: f64,
    /// Neighbor FAP to the reference UE.
    pub eta_femto_interf: f64,
    /// Macro BS to the reference UE.
    pub eta_macro: f64,
    pub p0_femto: f64,
    pub p0_macro: f64,
    pub wall_loss_db: f64,
    pub walls_between_femtos: u32,
    /// Interferer distances below this are clamped to it.
    pub min_distance: f64,
}

/// Macro preset: mean path loss of 128 dB at 1 km for 900 MHz.
pub const MACRO_LOSS_AT_1KM_DB: f64 = 128.0;

impl PropagationParams {
    /// Indoor femto links with free-space exponent and a 10 dB wall, macro
    /// link with exponent 3.5 calibrated to 128 dB at 1 km.
    pub fn preset(carrier_hz: f64) -> Self {
        let eta_macro = 3.5;
        Self {
            carrier_hz,
            eta_desired: 2.0,
            eta_femto_interf: 2.0,
            eta_macro,
            p0_femto: free_space_p0(carrier_hz),
            p0_macro: p0_for_loss_at(MACRO_LOSS_AT_1KM_DB, 1000.0, eta_macro),
            wall_loss_db: 10.0,
            walls_between_femtos: 1,
            min_distance: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidPropagation(m));
        for (name, eta) in [
            ("eta_desired", self.eta_desired),
            ("eta_femto_interf", self.eta_femto_interf),
            ("eta_macro", self.eta_macro),
        ] {
            if !(1.5..=6.0).contains(&eta) {
                return bad(format!("{name} must lie in [1.5, 6], got {eta}"));
            }
        }
        for (name, v) in [
            ("carrier_hz", self.carrier_hz),
            ("p0_femto", self.p0_femto),
            ("p0_macro", self.p0_macro),
            ("min_distance", self.min_distance),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return bad(format!("{name} must be positive, got {v}"));
            }
        }
        if !(self.wall_loss_db.is_finite() && self.wall_loss_db >= 0.0) {
            return bad(format!(
                "wall_loss_db must be >= 0, got {}",
                self.wall_loss_db
            ));
        }
        Ok(())
    }

    pub fn wall_attenuation(&self) -> f64 {
        db_to_linear(-(self.walls_between_femtos as f64) * self.wall_loss_db)
    }
}

impl Default for PropagationParams {
    fn default() -> Self {
        Self::preset(900e6)
    }
}

/// Mean desired power `S̄ = P_T · P_0f · d^(-η₁)` at `ue_distance` from the
/// serving FAP. No wall and no slow fading on this link.
pub fn mean_desired_power(fap: &Fap, ue_distance: f64, params: &PropagationParams) -> Result<f64> {
    if !(ue_distance.is_finite() && ue_distance > 0.0) {
        return Err(Error::NonPositiveDistance(ue_distance));
    }
    Ok(fap.tx_power * params.p0_femto * ue_distance.powf(-params.eta_desired))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FadingPair {
    pub slow: f64,
    pub fast: f64,
}

impl FadingPair {
    pub const UNIT: FadingPair = FadingPair {
        slow: 1.0,
        fast: 1.0,
    };

    pub fn gain(&self) -> f64 {
        self.slow * self.fast
    }
}

/// One fading realisation: `z0` on the desired link, one pair per femto
/// interferer (in neighbor order) and one pair for the macro link.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSample {
    pub z0: f64,
    pub femto: Vec<FadingPair>,
    pub macro_pair: FadingPair,
}

impl ChannelSample {
    /// All fading frozen at its mean.
    pub fn unit(neighbor_count: usize) -> Self {
        Self {
            z0: 1.0,
            femto: vec![FadingPair::UNIT; neighbor_count],
            macro_pair: FadingPair::UNIT,
        }
    }

    /// Redraws in place, in the order `z0`, interferer pairs, macro pair.
    pub fn redraw<R: Rng + ?Sized>(&mut self, neighbor_count: usize, rng: &mut R) {
        self.z0 = exp1(rng);
        self.femto.clear();
        self.femto.extend((0..neighbor_count).map(|_| FadingPair {
            slow: exp1(rng),
            fast: exp1(rng),
        }));
        self.macro_pair = FadingPair {
            slow: exp1(rng),
            fast: exp1(rng),
        };
    }
}

fn exp1<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let v: f64 = rng.sample(Exp1);
        if v > 0.0 {
            return v;
        }
    }
}

/// Draws `1 + 2·neighbor_count + 2` independent unit-mean exponentials.
pub fn draw_sample<R: Rng + ?Sized>(neighbor_count: usize, rng: &mut R) -> ChannelSample {
    let mut sample = ChannelSample::unit(0);
    sample.redraw(neighbor_count, rng);
    sample
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinkPowers {
    pub s_bar: f64,
    /// Per-neighbor interference, zero for non-co-channel neighbors.
    pub i_femto: Vec<f64>,
    pub i_macro: f64,
}

impl LinkPowers {
    pub fn i_femto_total(&self) -> f64 {
        self.i_femto.iter().sum()
    }

    pub fn total_interference(&self) -> f64 {
        self.i_femto_total() + self.i_macro
    }

    /// Instantaneous SIR for the desired fast-fading draw `z0`.
    pub fn sir(&self, z0: f64) -> f64 {
        self.s_bar * z0 / self.total_interference()
    }
}

/// Fading-free part of every link seen by one UE: `S̄`, and the gated mean
/// interference of each neighbor and of the macro BS. Per trial only the
/// fading multipliers change, so this is computed once.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkBudget {
    pub s_bar: f64,
    pub neighbors: Vec<FapId>,
    /// `X_i` for each neighbor.
    pub femto_cochannel: Vec<bool>,
    /// `P_T · P_0f · d^(-η₂) · walls · X_i` for each neighbor.
    pub femto_mean: Vec<f64>,
    /// `Y`.
    pub macro_cochannel: bool,
    /// `P_Tm · P_0m · d_m^(-η₃) · Y`.
    pub macro_mean: f64,
}

impl LinkBudget {
    pub fn new(
        deployment: &Deployment,
        graph: &NeighborGraph,
        reference: FapId,
        ue_position: Point,
        plan: &FrequencyPlan,
        ue_region: UeRegion,
        params: &PropagationParams,
    ) -> Result<Self> {
        let serving = deployment.fap(reference)?;
        let s_bar = mean_desired_power(serving, serving.position.distance(&ue_position), params)?;
        let alloc = serving.allocation(plan)?;
        let walls = params.wall_attenuation();

        let neighbors = graph.neighbors(reference).to_vec();
        let mut femto_cochannel = Vec::with_capacity(neighbors.len());
        let mut femto_mean = Vec::with_capacity(neighbors.len());
        for &id in &neighbors {
            let fap = deployment.fap(id)?;
            let other = fap.allocation(plan)?;
            let x = cochannel(plan, &alloc, ue_region, Interferer::Femto(&other));
            femto_cochannel.push(x);
            femto_mean.push(if x {
                let d = fap.position.distance(&ue_position).max(params.min_distance);
                fap.tx_power * params.p0_femto * d.powf(-params.eta_femto_interf) * walls
            } else {
                0.0
            });
        }

        let (macro_cochannel, macro_mean) = match &deployment.macro_bs {
            Some(m) => {
                let y = cochannel(
                    plan,
                    &alloc,
                    ue_region,
                    Interferer::Macro {
                        sector: serving.sector_index,
                    },
                );
                let mean = if y {
                    let d = m.position.distance(&ue_position).max(params.min_distance);
                    m.tx_power * params.p0_macro * d.powf(-params.eta_macro)
                } else {
                    0.0
                };
                (y, mean)
            }
            None => (false, 0.0),
        };

        Ok(Self {
            s_bar,
            neighbors,
            femto_cochannel,
            femto_mean,
            macro_cochannel,
            macro_mean,
        })
    }

    pub fn neighbor_count(&self) -> usize {
        self.neighbors.len()
    }

    /// Mean interference with fading averaged out.
    pub fn mean_interference(&self) -> f64 {
        self.femto_mean.iter().sum::<f64>() + self.macro_mean
    }

    fn check(&self, sample: &ChannelSample) -> Result<()> {
        if sample.femto.len() != self.neighbors.len() {
            return Err(Error::MissingFading {
                expected: self.neighbors.len(),
                got: sample.femto.len(),
            });
        }
        Ok(())
    }

    pub fn apply(&self, sample: &ChannelSample) -> Result<LinkPowers> {
        self.check(sample)?;
        let i_femto = self
            .femto_mean
            .iter()
            .zip(&self.femto_cochannel)
            .zip(&sample.femto)
            .map(|((m, &x), f)| if x { m * f.gain() } else { 0.0 })
            .collect();
        let i_macro = if self.macro_cochannel {
            self.macro_mean * sample.macro_pair.gain()
        } else {
            0.0
        };
        Ok(LinkPowers {
            s_bar: self.s_bar,
            i_femto,
            i_macro,
        })
    }

    /// `I_f + I_m` for one sample without allocating. Sums in neighbor order,
    /// then adds the macro term, matching [`LinkPowers::total_interference`].
    pub fn total_interference(&self, sample: &ChannelSample) -> Result<f64> {
        self.check(sample)?;
        let femto: f64 = self
            .femto_mean
            .iter()
            .zip(&self.femto_cochannel)
            .zip(&sample.femto)
            .map(|((m, &x), f)| if x { m * f.gain() } else { 0.0 })
            .sum();
        let macro_term = if self.macro_cochannel {
            self.macro_mean * sample.macro_pair.gain()
        } else {
            0.0
        };
        Ok(femto + macro_term)
    }
}

/// Received desired and interfering powers for one fading sample at
/// `ue_position`, served by `reference`.
#[allow(clippy::too_many_arguments)]
pub fn interference_powers(
    deployment: &Deployment,
    graph: &NeighborGraph,
    reference: FapId,
    ue_position: Point,
    plan: &FrequencyPlan,
    ue_region: UeRegion,
    params: &PropagationParams,
    sample: &ChannelSample,
) -> Result<LinkPowers> {
    LinkBudget::new(
        deployment,
        graph,
        reference,
        ue_position,
        plan,
        ue_region,
        params,
    )?
    .apply(sample)
}
