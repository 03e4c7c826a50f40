use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::SynthError;
use crate::fixtures::SEATMAP_IDS;

/// Names of the structural price regressors, in equation order. Logged
/// variables enter the price equation in logs.
pub const STRUCTURAL_TERMS: [&str; 10] =
    ["DIST", "BSN", "FLTIME", "SHIPMENT", "FUELP", "HUB", "SEATSH", "RHHI", "IROWDENS", "IPITCH"];

/// Generator settings. Every field can be set from a `key = value` file;
/// structural coefficients use `theta.<NAME> = value`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarketConfig {
    pub seed: u64,
    pub n_routes: usize,
    pub flights_per_route: usize,
    pub n_airports: usize,
    pub n_hubs: usize,
    pub n_survey_dates: usize,
    pub n_profiles: usize,
    /// Bundled seat-map ids flights may use.
    pub seatmap_pool: Vec<String>,
    /// Expected bookings as a fraction of seats.
    pub demand_intensity: f64,
    /// Log-scale spread of the per-flight demand factor.
    pub demand_dispersion: f64,
    pub business_share: f64,
    /// Probability that a flown passenger appears in the survey.
    pub survey_rate: f64,
    pub leisure_adv_median: f64,
    pub leisure_adv_log_sd: f64,
    pub business_adv_median: f64,
    pub business_adv_log_sd: f64,
    /// Log-price increase from an empty to a full cabin.
    pub rm_slope: f64,
    pub sigma: f64,
    pub base_log_price: f64,
    pub theta: BTreeMap<String, f64>,
    pub middle_seat_true_effect: f64,
    pub comfort_true_effect: f64,
    /// Plackett-Luce weights of the seat classes.
    pub aisle_weight: f64,
    pub window_weight: f64,
    pub middle_weight: f64,
    /// How fast middle-seat tolerance falls with the profile price tier.
    pub middle_tier_slope: f64,
    pub profile_price_sd: f64,
    pub airport_effect_sd: f64,
    pub date_effect_sd: f64,
    pub hour_effect_sd: f64,
    pub route_shock_sd: f64,
}

impl Default for MarketConfig {
    fn default() -> Self {
        let theta = [
            ("DIST", 0.25),
            ("BSN", 0.38),
            ("FLTIME", 0.45),
            ("SHIPMENT", 0.04),
            ("FUELP", 0.75),
            ("HUB", 0.50),
            ("SEATSH", 0.07),
            ("RHHI", 0.15),
            ("IROWDENS", -0.05),
            ("IPITCH", 1.10),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect();
        MarketConfig {
            seed: 1,
            n_routes: 120,
            flights_per_route: 25,
            n_airports: 55,
            n_hubs: 6,
            n_survey_dates: 130,
            n_profiles: 1761,
            seatmap_pool: SEATMAP_IDS.iter().map(|s| s.to_string()).collect(),
            demand_intensity: 0.8,
            demand_dispersion: 0.25,
            business_share: 0.3,
            survey_rate: 0.04,
            leisure_adv_median: 30.0,
            leisure_adv_log_sd: 1.0,
            business_adv_median: 3.0,
            business_adv_log_sd: 0.5,
            rm_slope: 1.2,
            sigma: 0.6,
            base_log_price: -1.8,
            theta,
            middle_seat_true_effect: 0.0,
            comfort_true_effect: 0.0,
            aisle_weight: 1.0,
            window_weight: 1.0,
            middle_weight: 0.05,
            middle_tier_slope: 1.0,
            profile_price_sd: 0.25,
            airport_effect_sd: 0.10,
            date_effect_sd: 0.10,
            hour_effect_sd: 0.08,
            route_shock_sd: 0.10,
        }
    }
}

impl MarketConfig {
    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: String| Err(SynthError::Config(m));
        for (name, p) in [("business_share", self.business_share), ("survey_rate", self.survey_rate)] {
            if !(0.0..=1.0).contains(&p) {
                return bad(format!("{name} must lie in [0, 1], got {p}"));
            }
        }
        if !(self.sigma > 0.0) {
            return bad(format!("sigma must be positive, got {}", self.sigma));
        }
        if self.seatmap_pool.is_empty() {
            return bad("seatmap_pool is empty".into());
        }
        if self.n_routes == 0 || self.flights_per_route == 0 || self.n_survey_dates == 0 || self.n_profiles == 0 {
            return bad("counts must be positive".into());
        }
        if self.n_airports < 2 || self.n_hubs > self.n_airports {
            return bad("need at least 2 airports and no more hubs than airports".into());
        }
        let max_pairs = self.n_airports * (self.n_airports - 1) / 2;
        if self.n_routes > max_pairs {
            return bad(format!("{} routes exceed the {max_pairs} airport pairs", self.n_routes));
        }
        if !(self.demand_intensity > 0.0) {
            return bad("demand_intensity must be positive".into());
        }
        for (name, v) in [
            ("leisure_adv_median", self.leisure_adv_median),
            ("business_adv_median", self.business_adv_median),
            ("aisle_weight", self.aisle_weight),
            ("window_weight", self.window_weight),
            ("middle_weight", self.middle_weight),
        ] {
            if !(v > 0.0) {
                return bad(format!("{name} must be positive, got {v}"));
            }
        }
        for (name, v) in [
            ("demand_dispersion", self.demand_dispersion),
            ("leisure_adv_log_sd", self.leisure_adv_log_sd),
            ("business_adv_log_sd", self.business_adv_log_sd),
            ("profile_price_sd", self.profile_price_sd),
            ("airport_effect_sd", self.airport_effect_sd),
            ("date_effect_sd", self.date_effect_sd),
            ("hour_effect_sd", self.hour_effect_sd),
            ("route_shock_sd", self.route_shock_sd),
        ] {
            if !(v >= 0.0) {
                return bad(format!("{name} must be non-negative, got {v}"));
            }
        }
        for k in self.theta.keys() {
            if !STRUCTURAL_TERMS.contains(&k.as_str()) {
                return bad(format!("unknown structural coefficient `{k}`"));
            }
        }
        Ok(())
    }

    /// Coefficient of a structural term (zero when not set).
    pub fn theta(&self, name: &str) -> f64 {
        self.theta.get(name).copied().unwrap_or(0.0)
    }

    /// Sets one field from its textual form.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), SynthError> {
        fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, SynthError> {
            v.parse().map_err(|_| SynthError::Config(format!("`{key}`: cannot parse `{v}`")))
        }
        let v = value.trim();
        if let Some(name) = key.strip_prefix("theta.") {
            if !STRUCTURAL_TERMS.contains(&name) {
                return Err(SynthError::Config(format!("unknown structural coefficient `{name}`")));
            }
            self.theta.insert(name.to_string(), num(key, v)?);
            return Ok(());
        }
        match key {
            "seed" => self.seed = num(key, v)?,
            "n_routes" => self.n_routes = num(key, v)?,
            "flights_per_route" => self.flights_per_route = num(key, v)?,
            "n_airports" => self.n_airports = num(key, v)?,
            "n_hubs" => self.n_hubs = num(key, v)?,
            "n_survey_dates" => self.n_survey_dates = num(key, v)?,
            "n_profiles" => self.n_profiles = num(key, v)?,
            "seatmap_pool" => {
                self.seatmap_pool = v.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect()
            }
            "demand_intensity" => self.demand_intensity = num(key, v)?,
            "demand_dispersion" => self.demand_dispersion = num(key, v)?,
            "business_share" => self.business_share = num(key, v)?,
            "survey_rate" => self.survey_rate = num(key, v)?,
            "leisure_adv_median" => self.leisure_adv_median = num(key, v)?,
            "leisure_adv_log_sd" => self.leisure_adv_log_sd = num(key, v)?,
            "business_adv_median" => self.business_adv_median = num(key, v)?,
            "business_adv_log_sd" => self.business_adv_log_sd = num(key, v)?,
            "rm_slope" => self.rm_slope = num(key, v)?,
            "sigma" => self.sigma = num(key, v)?,
            "base_log_price" => self.base_log_price = num(key, v)?,
            "middle_seat_true_effect" => self.middle_seat_true_effect = num(key, v)?,
            "comfort_true_effect" => self.comfort_true_effect = num(key, v)?,
            "aisle_weight" => self.aisle_weight = num(key, v)?,
            "window_weight" => self.window_weight = num(key, v)?,
            "middle_weight" => self.middle_weight = num(key, v)?,
            "middle_tier_slope" => self.middle_tier_slope = num(key, v)?,
            "profile_price_sd" => self.profile_price_sd = num(key, v)?,
            "airport_effect_sd" => self.airport_effect_sd = num(key, v)?,
            "date_effect_sd" => self.date_effect_sd = num(key, v)?,
            "hour_effect_sd" => self.hour_effect_sd = num(key, v)?,
            "route_shock_sd" => self.route_shock_sd = num(key, v)?,
            _ => return Err(SynthError::Config(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    /// Applies `key = value` lines; `#` starts a comment.
    pub fn apply_kv(&mut self, text: &str) -> Result<(), SynthError> {
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| SynthError::Config(format!("line {}: expected `key = value`", i + 1)))?;
            self.set(k.trim(), v).map_err(|e| match e {
                SynthError::Config(m) => SynthError::Config(format!("line {}: {m}", i + 1)),
                other => other,
            })?;
        }
        Ok(())
    }

    pub fn from_kv(text: &str) -> Result<Self, SynthError> {
        let mut cfg = MarketConfig::default();
        cfg.apply_kv(text)?;
        cfg.validate()?;
        Ok(cfg)
    }
}
