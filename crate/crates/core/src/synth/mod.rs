//! Seeded synthetic airline market. Routes, flights and passengers are drawn
//! from a known pricing process in which price rises with the share of the
//! cabin already sold, and seats are taken first-come first-served under
//! per-passenger preferences over aisle, window and middle positions.

mod config;
mod emit;
mod market;

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cabin::{CabinError, Lateral, SeatRef};

pub use config::{MarketConfig, STRUCTURAL_TERMS};
pub use emit::{emit_dataset, truth_path, write_csv};
pub use market::gen_market;

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid market config: {0}")]
    Config(String),
    #[error("unknown seat map `{0}`")]
    UnknownSeatmap(String),
    #[error(transparent)]
    Cabin(#[from] CabinError),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

/// Terms that enter the price equation in logs.
pub const LOGGED_TERMS: [&str; 8] = ["DIST", "FLTIME", "SHIPMENT", "FUELP", "SEATSH", "RHHI", "IROWDENS", "IPITCH"];

/// The pricing process behind a generated dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrueParams {
    pub seed: u64,
    /// Structural coefficients by regressor name.
    pub theta: BTreeMap<String, f64>,
    /// Regressors entering in logs.
    pub logged: Vec<String>,
    pub base_log_price: f64,
    /// Log-price slope in the fraction of seats sold before the booking.
    pub rm_slope: f64,
    pub sigma: f64,
    pub business_share: f64,
    pub middle_seat_true_effect: f64,
    pub comfort_true_effect: f64,
}

impl TrueParams {
    pub fn from_config(cfg: &MarketConfig) -> Self {
        TrueParams {
            seed: cfg.seed,
            theta: STRUCTURAL_TERMS.iter().map(|t| (t.to_string(), cfg.theta(t))).collect(),
            logged: LOGGED_TERMS.iter().map(|s| s.to_string()).collect(),
            base_log_price: cfg.base_log_price,
            rm_slope: cfg.rm_slope,
            sigma: cfg.sigma,
            business_share: cfg.business_share,
            middle_seat_true_effect: cfg.middle_seat_true_effect,
            comfort_true_effect: cfg.comfort_true_effect,
        }
    }

    pub fn is_logged(&self, term: &str) -> bool {
        self.logged.iter().any(|t| t == term)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Airport {
    pub code: String,
    pub hub: bool,
    /// Log-price effect of touching this airport.
    pub effect: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Route {
    pub origin: usize,
    pub destination: usize,
    pub dist_km: f64,
    /// Operating carriers and their seat shares (summing to 1).
    pub carriers: Vec<(String, f64)>,
    pub rhhi: f64,
    /// Regional fuel-price level.
    pub fuel_level: f64,
    pub shock: f64,
}

/// One booking, in booking order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PassengerDraw {
    pub adv_days: u32,
    pub business: bool,
    pub hub: bool,
    pub profile: usize,
    /// Seat classes in preference order.
    pub ranking: [Lateral; 3],
    /// Fraction of the cabin sold before this booking.
    pub load_so_far: f64,
    pub price: f64,
    pub seat: SeatRef,
    pub lateral: Lateral,
    pub surveyed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Flight {
    pub route: usize,
    pub airline: String,
    pub seatmap_id: String,
    pub seats: usize,
    pub date: usize,
    pub dep_hour: u8,
    pub fltime_min: f64,
    pub shipment_kg: f64,
    pub fuelp: f64,
    pub demand: usize,
    /// Would-be passengers turned away by a full cabin.
    pub spilled: usize,
    pub passengers: Vec<PassengerDraw>,
}

impl Flight {
    pub fn load_factor(&self) -> f64 {
        self.passengers.len() as f64 / self.seats as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthOutput {
    pub config: MarketConfig,
    pub truth: TrueParams,
    pub airports: Vec<Airport>,
    pub routes: Vec<Route>,
    pub flights: Vec<Flight>,
    /// Survey-date labels, indexed by `Flight::date`.
    pub dates: Vec<String>,
}

impl SynthOutput {
    pub fn route_id(&self, route: usize) -> String {
        let r = &self.routes[route];
        format!("{}-{}", self.airports[r.origin].code, self.airports[r.destination].code)
    }

    pub fn passenger_count(&self) -> usize {
        self.flights.iter().map(|f| f.passengers.len()).sum()
    }

    pub fn mean_load_factor(&self) -> f64 {
        self.flights.iter().map(Flight::load_factor).sum::<f64>() / self.flights.len() as f64
    }
}

/// Sum of squared shares.
pub fn herfindahl(shares: &[f64]) -> f64 {
    shares.iter().map(|s| s * s).sum()
}

/// Independent random stream for one `(tag, a, b, c)` key. The stream
/// depends only on the key and the seed, never on the order of use.
pub(crate) fn keyed_rng(seed: u64, tag: u64, a: u64, b: u64, c: u64) -> ChaCha8Rng {
    fn mix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut stream = mix(tag);
    for part in [a, b, c] {
        stream = mix(stream ^ part);
    }
    rng.set_stream(stream);
    rng
}

#[cfg(test)]
mod tests {
    use rand::Rng;

    use super::*;

    #[test]
    fn herfindahl_of_duopoly() {
        assert_eq!(herfindahl(&[0.5, 0.5]), 0.5);
        assert_eq!(herfindahl(&[1.0]), 1.0);
    }

    #[test]
    fn keyed_streams_are_stable_and_distinct() {
        let a: u64 = keyed_rng(1, 2, 3, 4, 5).random();
        let b: u64 = keyed_rng(1, 2, 3, 4, 5).random();
        let c: u64 = keyed_rng(1, 2, 3, 5, 4).random();
        let d: u64 = keyed_rng(2, 2, 3, 4, 5).random();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_ne!(a, d);
    }

    #[test]
    fn truth_has_no_seat_position_term() {
        let t = TrueParams::from_config(&MarketConfig::default());
        assert!(!t.theta.keys().any(|k| k.contains("MIDDLE") || k.contains("COMFORT")));
        assert_eq!(t.middle_seat_true_effect, 0.0);
    }
}
