//! Flat `key = value` experiment files.
//!
//! Every key has a default, so an empty file is a valid configuration.
//! `#` starts a comment. Keys ending in `_db` accept an optional `dB` suffix.
//! Unknown and repeated keys are rejected. [`ExperimentConfig::to_config_string`]
//! writes every key in a fixed order; parsing that output gives back the same
//! configuration.

use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use sha2::{Digest, Sha256};

use crate::channel::{free_space_p0, p0_for_loss_at, PropagationParams, MACRO_LOSS_AT_1KM_DB};
use crate::error::{Error, Result};
use crate::outage::{OutageConfig, SweepSetup, UePlacement};
use crate::son::SonConfig;
use crate::spectrum::{build_plan, Band, Scheme, UeRegion};
use crate::topology::DeploymentParams;

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub schemes: Vec<Scheme>,
    /// FAP counts for the density sweep.
    pub densities: Vec<usize>,
    pub n_deployments: u32,

    pub n_trials: u64,
    pub shards: u32,
    pub gamma_db: f64,
    pub ue_distance: f64,
    pub ue_region: UeRegion,
    pub ue_placement: UePlacement,

    pub macro_radius: f64,
    pub macro_height: f64,
    pub macro_tx_power: f64,
    pub n_sectors: usize,
    pub femto_count: usize,
    pub femto_radius: f64,
    pub fap_height: f64,
    pub fap_tx_power: f64,
    pub neighbor_radius: f64,
    pub reference_distance: Option<f64>,
    pub dense_threshold: usize,
    pub max_resample_attempts: usize,

    pub total_band: Band,
    pub femto_fraction: f64,
    pub edge_split: f64,

    pub carrier_hz: f64,
    pub eta_desired: f64,
    pub eta_femto_interf: f64,
    pub eta_macro: f64,
    /// `None` derives the value from the carrier (free space at 1 m).
    pub p0_femto: Option<f64>,
    /// `None` derives the value from `eta_macro` (128 dB at 1 km).
    pub p0_macro: Option<f64>,
    pub wall_loss_db: f64,
    pub walls_between_femtos: u32,
    pub min_distance: f64,

    pub son_power_step_db: f64,
    pub son_margin_db: f64,
    pub son_power_floor_w: f64,
    pub son_inner_radius_fraction: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let d = DeploymentParams::default();
        let o = OutageConfig::default();
        let p = PropagationParams::default();
        let s = SonConfig::default();
        Self {
            seed: 1,
            schemes: Scheme::ALL.to_vec(),
            densities: vec![100, 300, 1000, 3000],
            n_deployments: 1,
            n_trials: o.n_trials,
            shards: o.shards,
            gamma_db: o.gamma_db,
            ue_distance: o.ue_distance,
            ue_region: o.ue_region,
            ue_placement: o.placement,
            macro_radius: d.macro_radius,
            macro_height: d.macro_height,
            macro_tx_power: d.macro_tx_power,
            n_sectors: d.n_sectors,
            femto_count: d.femto_count,
            femto_radius: d.femto_radius,
            fap_height: d.fap_height,
            fap_tx_power: d.fap_max_tx_power,
            neighbor_radius: d.neighbor_radius,
            reference_distance: d.reference_distance,
            dense_threshold: d.dense_threshold,
            max_resample_attempts: d.max_resample_attempts,
            total_band: Band::new(0, 60_000_000).expect("non-empty"),
            femto_fraction: 1.0 / 3.0,
            edge_split: crate::spectrum::DEFAULT_EDGE_SPLIT,
            carrier_hz: p.carrier_hz,
            eta_desired: p.eta_desired,
            eta_femto_interf: p.eta_femto_interf,
            eta_macro: p.eta_macro,
            p0_femto: None,
            p0_macro: None,
            wall_loss_db: p.wall_loss_db,
            walls_between_femtos: p.walls_between_femtos,
            min_distance: p.min_distance,
            son_power_step_db: s.power_step_db,
            son_margin_db: s.margin_db,
            son_power_floor_w: s.power_floor_w,
            son_inner_radius_fraction: s.inner_radius_fraction,
        }
    }
}

fn list<T: Display>(items: &[T]) -> String {
    items
        .iter()
        .map(|t| t.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

fn opt<T: Display>(v: &Option<T>, none: &str) -> String {
    v.as_ref()
        .map_or_else(|| none.to_string(), |v| v.to_string())
}

fn parse<T: FromStr>(value: &str) -> std::result::Result<T, String>
where
    T::Err: Display,
{
    value
        .parse::<T>()
        .map_err(|e| format!("cannot parse `{value}`: {e}"))
}

fn parse_db(value: &str) -> std::result::Result<f64, String> {
    let v = value.trim();
    let v = if v.len() > 2 && v[v.len() - 2..].eq_ignore_ascii_case("db") {
        v[..v.len() - 2].trim_end()
    } else {
        v
    };
    parse(v)
}

fn parse_list<T: FromStr>(value: &str) -> std::result::Result<Vec<T>, String>
where
    T::Err: Display,
{
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(parse)
        .collect()
}

fn parse_opt(value: &str, none: &str) -> std::result::Result<Option<f64>, String> {
    if value.eq_ignore_ascii_case(none) {
        Ok(None)
    } else {
        parse(value).map(Some)
    }
}

impl ExperimentConfig {
    /// All keys, in output order.
    pub fn keys() -> Vec<&'static str> {
        Self::default()
            .entries()
            .into_iter()
            .map(|(k, _)| k)
            .collect()
    }

    /// `(key, value)` for every setting, in output order.
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        vec![
            ("seed", self.seed.to_string()),
            ("schemes", list(&self.schemes)),
            ("densities", list(&self.densities)),
            ("n_deployments", self.n_deployments.to_string()),
            ("n_trials", self.n_trials.to_string()),
            ("shards", self.shards.to_string()),
            ("gamma_db", self.gamma_db.to_string()),
            ("ue_distance", self.ue_distance.to_string()),
            ("ue_region", self.ue_region.to_string()),
            ("ue_placement", self.ue_placement.to_string()),
            ("macro_radius", self.macro_radius.to_string()),
            ("macro_height", self.macro_height.to_string()),
            ("macro_tx_power", self.macro_tx_power.to_string()),
            ("n_sectors", self.n_sectors.to_string()),
            ("femto_count", self.femto_count.to_string()),
            ("femto_radius", self.femto_radius.to_string()),
            ("fap_height", self.fap_height.to_string()),
            ("fap_tx_power", self.fap_tx_power.to_string()),
            ("neighbor_radius", self.neighbor_radius.to_string()),
            ("reference_distance", opt(&self.reference_distance, "none")),
            ("dense_threshold", self.dense_threshold.to_string()),
            (
                "max_resample_attempts",
                self.max_resample_attempts.to_string(),
            ),
            ("total_band", self.total_band.to_string()),
            ("femto_fraction", self.femto_fraction.to_string()),
            ("edge_split", self.edge_split.to_string()),
            ("carrier_hz", self.carrier_hz.to_string()),
            ("eta_desired", self.eta_desired.to_string()),
            ("eta_femto_interf", self.eta_femto_interf.to_string()),
            ("eta_macro", self.eta_macro.to_string()),
            ("p0_femto", opt(&self.p0_femto, "auto")),
            ("p0_macro", opt(&self.p0_macro, "auto")),
            ("wall_loss_db", self.wall_loss_db.to_string()),
            (
                "walls_between_femtos",
                self.walls_between_femtos.to_string(),
            ),
            ("min_distance", self.min_distance.to_string()),
            ("son_power_step_db", self.son_power_step_db.to_string()),
            ("son_margin_db", self.son_margin_db.to_string()),
            ("son_power_floor_w", self.son_power_floor_w.to_string()),
            (
                "son_inner_radius_fraction",
                self.son_inner_radius_fraction.to_string(),
            ),
        ]
    }

    /// Sets one key from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        let r: std::result::Result<(), String> = (|| {
            match key {
                "seed" => self.seed = parse(value)?,
                "schemes" => self.schemes = parse_list(value)?,
                "densities" => self.densities = parse_list(value)?,
                "n_deployments" => self.n_deployments = parse(value)?,
                "n_trials" => self.n_trials = parse(value)?,
                "shards" => self.shards = parse(value)?,
                "gamma_db" => self.gamma_db = parse_db(value)?,
                "ue_distance" => self.ue_distance = parse(value)?,
                "ue_region" => self.ue_region = parse(value)?,
                "ue_placement" => self.ue_placement = parse(value)?,
                "macro_radius" => self.macro_radius = parse(value)?,
                "macro_height" => self.macro_height = parse(value)?,
                "macro_tx_power" => self.macro_tx_power = parse(value)?,
                "n_sectors" => self.n_sectors = parse(value)?,
                "femto_count" => self.femto_count = parse(value)?,
                "femto_radius" => self.femto_radius = parse(value)?,
                "fap_height" => self.fap_height = parse(value)?,
                "fap_tx_power" => self.fap_tx_power = parse(value)?,
                "neighbor_radius" => self.neighbor_radius = parse(value)?,
                "reference_distance" => self.reference_distance = parse_opt(value, "none")?,
                "dense_threshold" => self.dense_threshold = parse(value)?,
                "max_resample_attempts" => self.max_resample_attempts = parse(value)?,
                "total_band" => self.total_band = parse(value)?,
                "femto_fraction" => self.femto_fraction = parse(value)?,
                "edge_split" => self.edge_split = parse(value)?,
                "carrier_hz" => self.carrier_hz = parse(value)?,
                "eta_desired" => self.eta_desired = parse(value)?,
                "eta_femto_interf" => self.eta_femto_interf = parse(value)?,
                "eta_macro" => self.eta_macro = parse(value)?,
                "p0_femto" => self.p0_femto = parse_opt(value, "auto")?,
                "p0_macro" => self.p0_macro = parse_opt(value, "auto")?,
                "wall_loss_db" => self.wall_loss_db = parse_db(value)?,
                "walls_between_femtos" => self.walls_between_femtos = parse(value)?,
                "min_distance" => self.min_distance = parse(value)?,
                "son_power_step_db" => self.son_power_step_db = parse_db(value)?,
                "son_margin_db" => self.son_margin_db = parse_db(value)?,
                "son_power_floor_w" => self.son_power_floor_w = parse(value)?,
                "son_inner_radius_fraction" => self.son_inner_radius_fraction = parse(value)?,
                _ => return Err(format!("unknown key `{key}`")),
            }
            Ok(())
        })();
        r.map_err(Error::InvalidConfig)
    }

    /// Applies `key=value`, as given on the command line.
    pub fn apply_override(&mut self, assignment: &str) -> Result<()> {
        let (k, v) = assignment.split_once('=').ok_or_else(|| {
            Error::InvalidConfig(format!("override `{assignment}` is not key=value"))
        })?;
        self.set(k.trim(), v)
    }

    /// Parses a config file body on top of the defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let mut config = Self::default();
        let mut seen = std::collections::HashSet::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| Error::ConfigParse {
                line: i + 1,
                message,
            };
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| err(format!("expected key = value, got `{line}`")))?;
            let k = k.trim();
            if !seen.insert(k.to_string()) {
                return Err(err(format!("key `{k}` given twice")));
            }
            config.set(k, v).map_err(|e| err(e.to_string()))?;
        }
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Every key, one `key = value` per line.
    pub fn to_config_string(&self) -> String {
        self.entries()
            .into_iter()
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect()
    }

    /// First 16 hex digits of the SHA-256 of [`to_config_string`](Self::to_config_string).
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.to_config_string().as_bytes());
        hex::encode(&digest[..8])
    }

    pub fn deployment_params(&self) -> DeploymentParams {
        DeploymentParams {
            macro_radius: self.macro_radius,
            macro_height: self.macro_height,
            macro_tx_power: self.macro_tx_power,
            n_sectors: self.n_sectors,
            femto_count: self.femto_count,
            femto_radius: self.femto_radius,
            fap_height: self.fap_height,
            fap_max_tx_power: self.fap_tx_power,
            neighbor_radius: self.neighbor_radius,
            reference_distance: self.reference_distance,
            dense_threshold: self.dense_threshold,
            max_resample_attempts: self.max_resample_attempts,
        }
    }

    pub fn propagation(&self) -> PropagationParams {
        PropagationParams {
            carrier_hz: self.carrier_hz,
            eta_desired: self.eta_desired,
            eta_femto_interf: self.eta_femto_interf,
            eta_macro: self.eta_macro,
            p0_femto: self
                .p0_femto
                .unwrap_or_else(|| free_space_p0(self.carrier_hz)),
            p0_macro: self
                .p0_macro
                .unwrap_or_else(|| p0_for_loss_at(MACRO_LOSS_AT_1KM_DB, 1000.0, self.eta_macro)),
            wall_loss_db: self.wall_loss_db,
            walls_between_femtos: self.walls_between_femtos,
            min_distance: self.min_distance,
        }
    }

    pub fn outage(&self) -> OutageConfig {
        OutageConfig {
            gamma_db: self.gamma_db,
            n_trials: self.n_trials,
            ue_distance: self.ue_distance,
            ue_region: self.ue_region,
            placement: self.ue_placement,
            shards: self.shards,
        }
    }

    pub fn son(&self) -> SonConfig {
        SonConfig {
            power_step_db: self.son_power_step_db,
            margin_db: self.son_margin_db,
            power_floor_w: self.son_power_floor_w,
            inner_radius_fraction: self.son_inner_radius_fraction,
        }
    }

    pub fn sweep_setup(&self) -> SweepSetup {
        SweepSetup {
            deployment: self.deployment_params(),
            total_band: self.total_band,
            femto_fraction: self.femto_fraction,
            edge_split: self.edge_split,
            n_deployments: self.n_deployments,
        }
    }

    /// Checks every module's preconditions without running anything.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.schemes.is_empty() {
            return bad("schemes must list at least one scheme".into());
        }
        if self.densities.is_empty() {
            return bad("densities must list at least one FAP count".into());
        }
        if self.densities.windows(2).any(|w| w[0] >= w[1]) {
            return bad(format!(
                "densities must be strictly increasing, got {:?}",
                self.densities
            ));
        }
        if self.n_deployments == 0 {
            return bad("n_deployments must be at least 1".into());
        }
        if let Some(&d) = self
            .densities
            .iter()
            .find(|&&d| d < 2 && d < self.dense_threshold)
        {
            return bad(format!(
                "density {d} is too small for a multi-femtocell deployment"
            ));
        }
        let deployment = self.deployment_params();
        deployment.validate()?;
        self.propagation().validate()?;
        self.son().validate()?;
        let outage = self.outage();
        outage.validate()?;
        if self.ue_distance > self.femto_radius {
            return Err(Error::InvalidOutageConfig(format!(
                "ue_distance {} m exceeds femto_radius {} m",
                self.ue_distance, self.femto_radius
            )));
        }
        for &scheme in &self.schemes {
            build_plan(
                scheme,
                self.total_band,
                self.n_sectors,
                self.femto_fraction,
                self.edge_split,
            )?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid_and_match_presets() {
        let c = ExperimentConfig::default();
        c.validate().unwrap();
        assert_eq!(c.propagation(), PropagationParams::default());
        assert_eq!(c.deployment_params(), DeploymentParams::default());
        assert_eq!(c.outage(), OutageConfig::default());
    }

    #[test]
    fn empty_file_is_defaults() {
        assert_eq!(
            ExperimentConfig::parse("# nothing\n\n").unwrap(),
            ExperimentConfig::default()
        );
    }

    #[test]
    fn round_trip() {
        let mut c = ExperimentConfig::default();
        c.apply_override("femto_fraction=0.3").unwrap();
        c.apply_override("reference_distance = none").unwrap();
        c.apply_override("p0_macro=1.234e-13").unwrap();
        c.apply_override("schemes=dynamic,same").unwrap();
        let text = c.to_config_string();
        let back = ExperimentConfig::parse(&text).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.hash(), c.hash());
        assert_ne!(c.hash(), ExperimentConfig::default().hash());
        assert_eq!(text.lines().count(), ExperimentConfig::keys().len());
    }

    #[test]
    fn db_suffix() {
        let c = ExperimentConfig::parse("gamma_db = 6 dB\nwall_loss_db=7dB").unwrap();
        assert_eq!(c.gamma_db, 6.0);
        assert_eq!(c.wall_loss_db, 7.0);
        assert!(ExperimentConfig::parse("ue_distance = 5dB").is_err());
    }

    #[test]
    fn errors_carry_line_numbers() {
        match ExperimentConfig::parse("seed = 3\n\nbogus = 1\n") {
            Err(Error::ConfigParse { line, message }) => {
                assert_eq!(line, 3);
                assert!(message.contains("bogus"), "{message}");
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            ExperimentConfig::parse("seed = 3\nseed = 4"),
            Err(Error::ConfigParse { line: 2, .. })
        ));
        assert!(ExperimentConfig::parse("seed").is_err());
        assert!(ExperimentConfig::parse("seed = -1")
            .unwrap_err()
            .is_validation());
    }

    #[test]
    fn validation_catches_each_module() {
        let check = |kv: &str| {
            let mut c = ExperimentConfig::default();
            c.apply_override(kv).unwrap();
            let e = c.validate().unwrap_err();
            assert!(e.is_validation(), "{kv}: {e}");
        };
        check("n_trials=0");
        check("densities=300,100");
        check("densities=");
        check("schemes=");
        check("femto_fraction=1.5");
        check("edge_split=0.9");
        check("eta_macro=9");
        check("macro_radius=0");
        check("ue_distance=20");
        check("shards=0");
        check("son_power_step_db=0");
        check("n_sectors=2");
    }
}
