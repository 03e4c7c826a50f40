use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{StudyError, StudyRecord};
use crate::cabin::{ipitch, irowdens, Lateral, SeatMap, SeatRef};
use crate::data::{Column, Dataset};

/// Column names of the estimation dataset.
pub mod names {
    pub const P: &str = "P";
    pub const ADV: &str = "ADV";
    pub const DIST: &str = "DIST";
    pub const BSN: &str = "BSN";
    pub const FLTIME: &str = "FLTIME";
    pub const SHIPMENT: &str = "SHIPMENT";
    pub const REVPAX: &str = "REVPAX";
    pub const LF: &str = "LF";
    pub const FUELP: &str = "FUELP";
    pub const HUB: &str = "HUB";
    pub const SEATSH: &str = "SEATSH";
    pub const RHHI: &str = "RHHI";
    pub const LASTROW: &str = "LASTROW";
    pub const EMERGEXIT: &str = "EMERGEXIT";
    pub const COMFORT: &str = "COMFORT";
    pub const COMFORT_PLACEBO: &str = "COMFORT (placebo)";
    pub const MIDDLE: &str = "MIDDLE";
    pub const MIDDLE_ADV: [&str; 4] =
        ["MIDDLE × ADV (1w)", "MIDDLE × ADV (2w)", "MIDDLE × ADV (3w)", "MIDDLE × ADV (>3w)"];
    pub const IROWDENS: &str = "IROWDENS";
    pub const IPITCH: &str = "IPITCH";
    /// Estimated share of the cabin sold before the booking.
    pub const BOOKED_AHEAD: &str = "BOOKED_AHEAD";
    pub const ADV_BUCKET: &str = "adv_bucket";
    pub const SVY_DATE: &str = "svy_date";
    pub const DEP_HOUR: &str = "dep_hour";
    pub const ORIGIN: &str = "origin";
    pub const DESTINATION: &str = "destination";
    pub const PAX_PROFILE: &str = "pax_profile_id";
    pub const ROUTE: &str = "route_id";
    pub const SEATMAP: &str = "seatmap_id";
}

pub const BUCKET_LABELS: [&str; 4] = ["1w", "2w", "3w", ">3w"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariableOptions {
    /// Upper day bounds of the 1w, 2w and 3w booking buckets.
    pub adv_bucket_bounds: [u32; 3],
    /// Enter ADV in logs (the default) or in days.
    pub log_adv: bool,
}

impl Default for VariableOptions {
    fn default() -> Self {
        VariableOptions { adv_bucket_bounds: [7, 14, 21], log_adv: true }
    }
}

impl VariableOptions {
    /// Bucket index (0 = 1w .. 3 = >3w) of an advance-purchase value.
    pub fn bucket(&self, adv_days: u32) -> usize {
        self.adv_bucket_bounds.iter().position(|&b| adv_days <= b).unwrap_or(3)
    }
}

/// True when `seat` on `map` sits where a sister layout (same aircraft model
/// and airline) installs an extended-pitch seat, while `map` itself has no
/// extended-pitch rows.
pub fn comfort_placebo(map: &SeatMap, seat: SeatRef, maps: &BTreeMap<String, SeatMap>) -> bool {
    if map.has_comfort_rows() {
        return false;
    }
    maps.values().any(|other| {
        other.has_comfort_rows()
            && other.aircraft_model == map.aircraft_model
            && other.airline == map.airline
            && other.classify_seat(seat).map(|c| c.comfort).unwrap_or(false)
    })
}

fn positive_log(value: f64, field: &'static str, row: usize) -> Result<f64, StudyError> {
    if value > 0.0 && value.is_finite() {
        Ok(value.ln())
    } else {
        Err(StudyError::NonPositive { row, field, value })
    }
}

/// Builds the estimation dataset: logged continuous regressors, seat-position
/// dummies from the cabin maps, booking-bucket interactions and the
/// categorical control sources.
pub fn build_variables(
    records: &[StudyRecord],
    maps: &BTreeMap<String, SeatMap>,
    opts: &VariableOptions,
) -> Result<Dataset, StudyError> {
    use names::*;
    let n = records.len();
    let mut num: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    let mut push = |k: &'static str, v: f64| num.entry(k).or_insert_with(|| Vec::with_capacity(n)).push(v);
    let mut index_cache: BTreeMap<&str, (f64, f64)> = BTreeMap::new();
    let mut buckets = Vec::with_capacity(n);

    for (i, r) in records.iter().enumerate() {
        let map =
            maps.get(&r.seatmap_id).ok_or_else(|| StudyError::UnknownSeatmap { row: i, id: r.seatmap_id.clone() })?;
        let letter = r.letter.chars().next().unwrap_or('?');
        let seat = SeatRef::new(r.row, letter);
        let class = map.classify_seat(seat).map_err(|source| StudyError::Seat { row: i, source })?;
        let (ln_irowdens, ln_ipitch) =
            *index_cache.entry(r.seatmap_id.as_str()).or_insert_with(|| (irowdens(map).ln(), ipitch(map).ln()));

        push(P, positive_log(r.price, "price", i)?);
        let adv = f64::from(r.adv_days);
        push(ADV, if opts.log_adv { positive_log(adv, "adv_days", i)? } else { adv });
        push(DIST, positive_log(r.dist_km, "dist_km", i)?);
        push(BSN, f64::from(r.bsn));
        push(FLTIME, positive_log(r.fltime_min, "fltime_min", i)?);
        push(SHIPMENT, positive_log(r.shipment_kg, "shipment_kg", i)?);
        push(REVPAX, positive_log(f64::from(r.revpax), "revpax", i)?);
        push(LF, positive_log(r.lf, "lf", i)?);
        push(FUELP, positive_log(r.fuelp, "fuelp", i)?);
        push(HUB, f64::from(r.hub));
        push(SEATSH, positive_log(r.seatsh, "seatsh", i)?);
        push(RHHI, positive_log(r.rhhi, "rhhi", i)?);
        push(IROWDENS, ln_irowdens);
        push(IPITCH, ln_ipitch);

        let middle = class.lateral == Lateral::Middle;
        push(LASTROW, f64::from(u8::from(class.lastrow)));
        push(EMERGEXIT, f64::from(u8::from(class.emergexit)));
        push(COMFORT, f64::from(u8::from(class.comfort)));
        push(COMFORT_PLACEBO, f64::from(u8::from(comfort_placebo(map, seat, maps))));
        push(MIDDLE, f64::from(u8::from(middle)));
        let b = opts.bucket(r.adv_days);
        for (k, name) in MIDDLE_ADV.iter().enumerate() {
            push(name, f64::from(u8::from(middle && b == k)));
        }
        buckets.push(b);
    }

    // Share of passengers booking earlier than each record, scaled by the
    // flight's load: a data-driven stand-in for cabin fill at booking time.
    let mut advs: Vec<u32> = records.iter().map(|r| r.adv_days).collect();
    advs.sort_unstable();
    for r in records {
        let later_or_equal = advs.partition_point(|&a| a <= r.adv_days);
        let earlier = (n - later_or_equal) as f64 / n as f64;
        push(BOOKED_AHEAD, r.lf * earlier);
    }

    let mut ds = Dataset::new(n);
    let order = [
        P,
        ADV,
        DIST,
        BSN,
        FLTIME,
        SHIPMENT,
        REVPAX,
        LF,
        FUELP,
        HUB,
        SEATSH,
        RHHI,
        LASTROW,
        EMERGEXIT,
        COMFORT,
        COMFORT_PLACEBO,
        MIDDLE,
        MIDDLE_ADV[0],
        MIDDLE_ADV[1],
        MIDDLE_ADV[2],
        MIDDLE_ADV[3],
        IROWDENS,
        IPITCH,
        BOOKED_AHEAD,
    ];
    for name in order {
        ds.push(name, Column::Numeric(num.remove(name).unwrap_or_default()))?;
    }
    let text = |f: &dyn Fn(&StudyRecord) -> String| Column::Categorical(records.iter().map(f).collect());
    ds.push(ADV_BUCKET, Column::Categorical(buckets.iter().map(|&b| BUCKET_LABELS[b].to_string()).collect()))?;
    ds.push(SVY_DATE, text(&|r| r.svy_date.clone()))?;
    ds.push(DEP_HOUR, text(&|r| format!("{:02}", r.dep_hour)))?;
    ds.push(ORIGIN, text(&|r| r.route_id.split('-').next().unwrap_or("").to_string()))?;
    ds.push(DESTINATION, text(&|r| r.route_id.split('-').nth(1).unwrap_or("").to_string()))?;
    ds.push(PAX_PROFILE, text(&|r| r.pax_profile_id.clone()))?;
    ds.push(ROUTE, text(&|r| r.route_id.clone()))?;
    ds.push(SEATMAP, text(&|r| r.seatmap_id.clone()))?;
    ds.cluster_key = Some(ROUTE.to_string());
    Ok(ds)
}
