use serde::{Deserialize, Serialize};

/// Header of the study CSV, in column order.
pub const STUDY_COLUMNS: [&str; 20] = [
    "price",
    "adv_days",
    "dist_km",
    "bsn",
    "fltime_min",
    "shipment_kg",
    "revpax",
    "lf",
    "fuelp",
    "hub",
    "seatsh",
    "rhhi",
    "row",
    "letter",
    "seatmap_id",
    "airline",
    "route_id",
    "svy_date",
    "dep_hour",
    "pax_profile_id",
];

/// One surveyed passenger on one flight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyRecord {
    pub price: f64,
    pub adv_days: u32,
    pub dist_km: f64,
    pub bsn: u8,
    pub fltime_min: f64,
    pub shipment_kg: f64,
    pub revpax: u32,
    pub lf: f64,
    pub fuelp: f64,
    pub hub: u8,
    /// Carrier share of route seats, times 100.
    pub seatsh: f64,
    pub rhhi: f64,
    pub row: u32,
    pub letter: String,
    pub seatmap_id: String,
    pub airline: String,
    /// Airport pair, `AAA-BBB`.
    pub route_id: String,
    pub svy_date: String,
    pub dep_hour: u8,
    pub pax_profile_id: String,
}

impl StudyRecord {
    /// First violated field invariant, as a human-readable reason.
    pub fn check(&self) -> Result<(), String> {
        let positive = [
            ("price", self.price),
            ("adv_days", self.adv_days as f64),
            ("dist_km", self.dist_km),
            ("fltime_min", self.fltime_min),
            ("shipment_kg", self.shipment_kg),
            ("revpax", self.revpax as f64),
            ("fuelp", self.fuelp),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(format!("{name} must be positive (got {v})"));
            }
        }
        if !(self.lf > 0.0 && self.lf <= 1.0) {
            return Err("LF out of range".into());
        }
        if !(self.seatsh > 0.0 && self.seatsh <= 100.0) {
            return Err("SEATSH out of range".into());
        }
        if !(self.rhhi > 0.0 && self.rhhi <= 1.0) {
            return Err("RHHI out of range".into());
        }
        if self.bsn > 1 {
            return Err("BSN must be 0 or 1".into());
        }
        if self.hub > 1 {
            return Err("HUB must be 0 or 1".into());
        }
        if self.dep_hour > 23 {
            return Err("dep_hour out of range".into());
        }
        let mut letters = self.letter.chars();
        if !matches!((letters.next(), letters.next()), (Some(c), None) if c.is_ascii_alphabetic()) {
            return Err(format!("invalid seat letter `{}`", self.letter));
        }
        if self.route_id.split('-').filter(|s| !s.is_empty()).count() != 2 {
            return Err(format!("route_id `{}` is not an airport pair", self.route_id));
        }
        for (name, v) in
            [("seatmap_id", &self.seatmap_id), ("svy_date", &self.svy_date), ("pax_profile_id", &self.pax_profile_id)]
        {
            if v.trim().is_empty() {
                return Err(format!("{name} is empty"));
            }
        }
        Ok(())
    }
}
