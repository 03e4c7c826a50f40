use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{CabinError, SeatRef};

/// Passenger counts by row and seat letter with integer-percent shares.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DispersionTable {
    pub rows: Vec<u32>,
    pub letters: Vec<char>,
    /// `counts[r][l]` for `rows[r]`, `letters[l]`.
    pub counts: Vec<Vec<u64>>,
    pub row_totals: Vec<u64>,
    pub letter_totals: Vec<u64>,
    pub grand_total: u64,
    /// Share of each cell within its row, rounded to whole percent.
    pub row_share_pct: Vec<Vec<u64>>,
    /// Share of each letter in the grand total, rounded to whole percent.
    pub letter_share_pct: Vec<u64>,
    /// Share of each row within its letter column, rounded to whole percent.
    pub column_share_pct: Vec<Vec<u64>>,
}

/// Rounds `100 * part / whole` to the nearest integer, halves away from zero.
/// Exact in integer arithmetic; zero when `whole` is zero.
pub(crate) fn pct_round(part: u64, whole: u64) -> u64 {
    if whole == 0 {
        return 0;
    }
    let (p, w) = (part as u128, whole as u128);
    ((200 * p + w) / (2 * w)) as u64
}

pub fn dispersion_table(records: &[(SeatRef, u64)]) -> DispersionTable {
    let mut cells: BTreeMap<(u32, char), u64> = BTreeMap::new();
    let mut rows = BTreeSet::new();
    let mut letters = BTreeSet::new();
    for (seat, count) in records {
        *cells.entry((seat.row_label, seat.letter)).or_default() += count;
        rows.insert(seat.row_label);
        letters.insert(seat.letter);
    }
    let rows: Vec<u32> = rows.into_iter().collect();
    let letters: Vec<char> = letters.into_iter().collect();
    let counts: Vec<Vec<u64>> =
        rows.iter().map(|r| letters.iter().map(|l| cells.get(&(*r, *l)).copied().unwrap_or(0)).collect()).collect();
    let row_totals: Vec<u64> = counts.iter().map(|r| r.iter().sum()).collect();
    let letter_totals: Vec<u64> = (0..letters.len()).map(|l| counts.iter().map(|r| r[l]).sum()).collect();
    let grand_total: u64 = row_totals.iter().sum();
    let row_share_pct =
        counts.iter().zip(&row_totals).map(|(r, &t)| r.iter().map(|&c| pct_round(c, t)).collect()).collect();
    let letter_share_pct = letter_totals.iter().map(|&c| pct_round(c, grand_total)).collect();
    let column_share_pct =
        counts.iter().map(|r| r.iter().zip(&letter_totals).map(|(&c, &t)| pct_round(c, t)).collect()).collect();
    DispersionTable {
        rows,
        letters,
        counts,
        row_totals,
        letter_totals,
        grand_total,
        row_share_pct,
        letter_share_pct,
        column_share_pct,
    }
}

impl DispersionTable {
    /// Reads CSV with `row` and `letter` columns and an optional `count`
    /// column; without `count` every line is one passenger. Other columns
    /// are ignored, so study datasets can be read directly.
    pub fn from_csv(text: &str) -> Result<Self, CabinError> {
        #[derive(Deserialize)]
        struct Rec {
            row: u32,
            letter: char,
            #[serde(default)]
            count: Option<u64>,
        }
        let mut reader = csv::Reader::from_reader(text.as_bytes());
        let mut records = Vec::new();
        for (i, rec) in reader.deserialize::<Rec>().enumerate() {
            let rec = rec.map_err(|e| CabinError::Syntax { line: i + 2, message: e.to_string() })?;
            records.push((SeatRef::new(rec.row, rec.letter), rec.count.unwrap_or(1)));
        }
        Ok(dispersion_table(&records))
    }

    /// Flattens the table back into per-seat records.
    pub fn records(&self) -> Vec<(SeatRef, u64)> {
        let mut out = Vec::with_capacity(self.rows.len() * self.letters.len());
        for (r, row) in self.rows.iter().enumerate() {
            for (l, letter) in self.letters.iter().enumerate() {
                out.push((SeatRef::new(*row, *letter), self.counts[r][l]));
            }
        }
        out
    }

    pub fn row_index(&self, row: u32) -> Option<usize> {
        self.rows.iter().position(|&r| r == row)
    }

    pub fn letter_index(&self, letter: char) -> Option<usize> {
        self.letters.iter().position(|&l| l == letter)
    }

    /// Unrounded percentage of a cell within its row.
    pub fn exact_row_share(&self, r: usize, l: usize) -> f64 {
        100.0 * self.counts[r][l] as f64 / self.row_totals[r] as f64
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let _ = write!(out, "{:>5}", "row");
        for l in &self.letters {
            let _ = write!(out, " {l:>7}");
        }
        let _ = write!(out, " {:>8} |", "total");
        for l in &self.letters {
            let _ = write!(out, " {:>4}", l);
        }
        out.push('\n');
        for (r, row) in self.rows.iter().enumerate() {
            let _ = write!(out, "{row:>5}");
            for c in &self.counts[r] {
                let _ = write!(out, " {c:>7}");
            }
            let _ = write!(out, " {:>8} |", self.row_totals[r]);
            for p in &self.row_share_pct[r] {
                let _ = write!(out, " {:>3}%", p);
            }
            out.push('\n');
        }
        let _ = write!(out, "{:>5}", "total");
        for c in &self.letter_totals {
            let _ = write!(out, " {c:>7}");
        }
        let _ = write!(out, " {:>8} |", self.grand_total);
        for p in &self.letter_share_pct {
            let _ = write!(out, " {:>3}%", p);
        }
        out.push('\n');
        out
    }
}
