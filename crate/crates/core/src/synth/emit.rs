use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use super::{SynthError, SynthOutput};
use crate::study::StudyRecord;

impl SynthOutput {
    /// Study rows for every surveyed passenger, ordered by route, flight and
    /// booking.
    pub fn records(&self) -> Vec<StudyRecord> {
        (0..self.flights.len()).flat_map(|i| self.flight_records(i)).collect()
    }

    /// Study rows for the surveyed passengers of one flight.
    pub fn flight_records(&self, index: usize) -> Vec<StudyRecord> {
        let flight = &self.flights[index];
        let mut out = Vec::new();
        let route = &self.routes[flight.route];
        let route_id = self.route_id(flight.route);
        let share = route.carriers.iter().find(|c| c.0 == flight.airline).map(|c| c.1).unwrap_or(0.0);
        let flown = flight.passengers.len();
        for p in flight.passengers.iter().filter(|p| p.surveyed) {
            out.push(StudyRecord {
                price: p.price,
                adv_days: p.adv_days,
                dist_km: route.dist_km,
                bsn: u8::from(p.business),
                fltime_min: flight.fltime_min,
                shipment_kg: flight.shipment_kg,
                revpax: flown as u32,
                lf: flight.load_factor(),
                fuelp: flight.fuelp,
                hub: u8::from(p.hub),
                seatsh: 100.0 * share,
                rhhi: route.rhhi,
                row: p.seat.row_label,
                letter: p.seat.letter.to_string(),
                seatmap_id: flight.seatmap_id.clone(),
                airline: flight.airline.clone(),
                route_id: route_id.clone(),
                svy_date: self.dates[flight.date].clone(),
                dep_hour: flight.dep_hour,
                pax_profile_id: format!("P{:04}", p.profile),
            });
        }
        out
    }
}

pub fn write_csv<W: Write>(writer: W, records: &[StudyRecord]) -> Result<(), SynthError> {
    let mut w = csv::Writer::from_writer(writer);
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Sidecar path for a dataset: `d.csv` -> `d.truth.json`.
pub fn truth_path(csv_path: &Path) -> PathBuf {
    let stem = csv_path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    csv_path.with_file_name(format!("{stem}.truth.json"))
}

/// Writes the study CSV and its truth sidecar; returns the sidecar path.
pub fn emit_dataset(out: &SynthOutput, csv_path: &Path) -> Result<PathBuf, SynthError> {
    let records = out.records();
    write_csv(BufWriter::new(File::create(csv_path)?), &records)?;
    let sidecar = truth_path(csv_path);
    let mut f = BufWriter::new(File::create(&sidecar)?);
    serde_json::to_writer_pretty(&mut f, &out.truth)?;
    f.write_all(b"\n")?;
    f.flush()?;
    log::info!("wrote {} rows to {}", records.len(), csv_path.display());
    Ok(sidecar)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{gen_market, MarketConfig, TrueParams};

    fn small() -> MarketConfig {
        MarketConfig {
            n_routes: 20,
            flights_per_route: 8,
            n_airports: 15,
            n_hubs: 2,
            survey_rate: 0.3,
            ..MarketConfig::default()
        }
    }

    #[test]
    fn truth_sidecar_name() {
        assert_eq!(truth_path(Path::new("/tmp/d.csv")), PathBuf::from("/tmp/d.truth.json"));
    }

    #[test]
    fn lf_is_flown_over_seats() {
        let out = gen_market(&small()).unwrap();
        for (i, f) in out.flights.iter().enumerate() {
            let mut buf = Vec::new();
            write_csv(&mut buf, &out.flight_records(i)).unwrap();
            let expected = f.passengers.len() as f64 / f.seats as f64;
            for r in csv::Reader::from_reader(buf.as_slice()).deserialize::<StudyRecord>() {
                let r = r.unwrap();
                assert_eq!(r.lf, expected);
                assert_eq!(r.revpax as usize, f.passengers.len());
            }
        }
    }

    #[test]
    fn emitted_rows_pass_schema_checks() {
        let out = gen_market(&small()).unwrap();
        let recs = out.records();
        assert!(!recs.is_empty());
        for r in &recs {
            r.check().unwrap();
        }
    }

    #[test]
    fn sidecar_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.csv");
        let out = gen_market(&small()).unwrap();
        let sidecar = emit_dataset(&out, &path).unwrap();
        let back: TrueParams = serde_json::from_reader(File::open(sidecar).unwrap()).unwrap();
        assert_eq!(back, out.truth);
        let again = dir.path().join("n.csv");
        emit_dataset(&gen_market(&small()).unwrap(), &again).unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), std::fs::read(&again).unwrap());
    }
}
