//! Cabin layouts: the `.smap` seat-map format, seat classification, the
//! row-density / pitch indexes, zone capacity arithmetic and passenger
//! dispersion tables.

mod dispersion;
mod indexes;
mod parse;
mod refs;

use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use dispersion::{dispersion_table, DispersionTable};
pub use indexes::{capacity_from_zones, ipitch, ipitch_weighted, irowdens, CabinZone, PitchWeighting};
pub use parse::parse_seatmap;
pub use refs::{ReferenceMaxima, ReferenceRow};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CabinError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: row {row} has {found} cells but the layout declares {expected} seat letters")]
    CellCount { line: usize, row: u32, expected: usize, found: usize },
    #[error("line {line}: row label {label} does not increase (previous row {previous})")]
    RowOrder { line: usize, label: u32, previous: u32 },
    #[error("missing header key `{0}`")]
    MissingHeader(&'static str),
    #[error("invalid header `{key}`: {message}")]
    InvalidHeader { key: &'static str, message: String },
    #[error("zero seats: no row carries a seat")]
    ZeroSeats,
    #[error("seat {seat} does not resolve: {reason}")]
    UnresolvedSeat { seat: String, reason: String },
    #[error("invalid seat designator `{0}`")]
    BadDesignator(String),
    #[error("invalid cabin zone `{0}` (expected PxRxA, e.g. 34x7x6)")]
    BadZone(String),
    #[error("reference maxima: {0}")]
    References(String),
}

/// State of one seat position in a row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Cell {
    Seat,
    /// Seat installed with extended pitch.
    SeatPlus,
    Absent,
}

impl Cell {
    pub fn is_seat(self) -> bool {
        !matches!(self, Cell::Absent)
    }

    fn token(self) -> &'static str {
        match self {
            Cell::Seat => "1",
            Cell::SeatPlus => "1+",
            Cell::Absent => ".",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowSpec {
    pub label: u32,
    pub cells: Vec<Cell>,
    /// Resolved pitch for the row, in inches.
    pub pitch_in: f64,
    /// True when the pitch came from a `pitch=` override rather than the header.
    pub explicit_pitch: bool,
    pub exit: bool,
}

impl RowSpec {
    pub fn seat_count(&self) -> usize {
        self.cells.iter().filter(|c| c.is_seat()).count()
    }

    pub fn has_seats(&self) -> bool {
        self.cells.iter().any(|c| c.is_seat())
    }
}

/// A validated cabin layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeatMap {
    pub aircraft_model: String,
    pub airline: String,
    /// Seat letters from left wall to right wall.
    pub letters: Vec<char>,
    /// Letter indices that are immediately followed by an aisle.
    pub aisle_after: Vec<usize>,
    pub default_pitch_in: f64,
    pub pitch_plus_in: f64,
    pub refmax_rows: u32,
    pub refmax_pitch_in: f64,
    pub rows: Vec<RowSpec>,
}

impl SeatMap {
    /// Checks every layout invariant; the parser calls this before returning.
    pub fn validate(&self) -> Result<(), CabinError> {
        if self.letters.is_empty() {
            return Err(CabinError::InvalidHeader { key: "letters", message: "no seat letters".into() });
        }
        for (i, a) in self.letters.iter().enumerate() {
            if self.letters[..i].contains(a) {
                return Err(CabinError::InvalidHeader { key: "letters", message: format!("duplicate letter {a}") });
            }
        }
        if self.aisle_after.iter().any(|&i| i + 1 >= self.letters.len()) {
            return Err(CabinError::InvalidHeader {
                key: "letters",
                message: "aisle separator must sit between two letters".into(),
            });
        }
        if self.refmax_rows < 1 {
            return Err(CabinError::InvalidHeader { key: "refmax_rows", message: "must be at least 1".into() });
        }
        for (key, v) in [
            ("refmax_pitch_in", self.refmax_pitch_in),
            ("default_pitch_in", self.default_pitch_in),
            ("pitch_plus_in", self.pitch_plus_in),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(CabinError::InvalidHeader { key, message: format!("must be positive, got {v}") });
            }
        }
        let mut previous: Option<u32> = None;
        for row in &self.rows {
            if row.cells.len() != self.letters.len() {
                return Err(CabinError::CellCount {
                    line: 0,
                    row: row.label,
                    expected: self.letters.len(),
                    found: row.cells.len(),
                });
            }
            if let Some(p) = previous {
                if row.label <= p {
                    return Err(CabinError::RowOrder { line: 0, label: row.label, previous: p });
                }
            }
            if !(row.pitch_in.is_finite() && row.pitch_in > 0.0) {
                return Err(CabinError::InvalidHeader {
                    key: "pitch",
                    message: format!("row {} has non-positive pitch", row.label),
                });
            }
            previous = Some(row.label);
        }
        if self.seat_count() == 0 {
            return Err(CabinError::ZeroSeats);
        }
        Ok(())
    }

    pub fn seat_count(&self) -> usize {
        self.rows.iter().map(RowSpec::seat_count).sum()
    }

    /// Rows that carry at least one seat, in label order.
    pub fn seat_rows(&self) -> impl Iterator<Item = &RowSpec> {
        self.rows.iter().filter(|r| r.has_seats())
    }

    pub fn seat_row_count(&self) -> usize {
        self.seat_rows().count()
    }

    /// Labeled rows including those with no seats (skipped row numbers).
    pub fn labeled_row_count(&self) -> usize {
        self.rows.len()
    }

    pub fn last_seat_row(&self) -> Option<u32> {
        self.seat_rows().map(|r| r.label).last()
    }

    pub fn has_comfort_rows(&self) -> bool {
        self.seat_rows().any(|r| r.pitch_in > self.default_pitch_in)
    }

    pub fn row(&self, label: u32) -> Option<&RowSpec> {
        self.rows.binary_search_by_key(&label, |r| r.label).ok().map(|i| &self.rows[i])
    }

    pub fn letter_index(&self, letter: char) -> Option<usize> {
        self.letters.iter().position(|&l| l == letter.to_ascii_uppercase())
    }

    /// Contiguous letter blocks between fuselage walls and aisles.
    pub fn blocks(&self) -> Vec<Range<usize>> {
        let mut blocks = Vec::with_capacity(self.aisle_after.len() + 1);
        let mut start = 0;
        let mut cuts = self.aisle_after.clone();
        cuts.sort_unstable();
        for cut in cuts {
            blocks.push(start..cut + 1);
            start = cut + 1;
        }
        blocks.push(start..self.letters.len());
        blocks
    }

    /// Lateral class of a letter position, from block geometry alone.
    pub fn lateral_of(&self, letter_idx: usize) -> Lateral {
        let n = self.letters.len();
        let block =
            self.blocks().into_iter().find(|b| b.contains(&letter_idx)).expect("letter index inside the layout");
        let at_left_wall = block.start == 0 && letter_idx == block.start;
        let at_right_wall = block.end == n && letter_idx + 1 == block.end;
        if at_left_wall || at_right_wall {
            Lateral::Window
        } else if letter_idx == block.start || letter_idx + 1 == block.end {
            Lateral::Aisle
        } else {
            Lateral::Middle
        }
    }

    /// Iterates every installed seat as `(SeatRef, Cell)` in row-major order.
    pub fn seats(&self) -> impl Iterator<Item = (SeatRef, Cell)> + '_ {
        self.rows.iter().flat_map(move |row| {
            row.cells
                .iter()
                .enumerate()
                .filter(|(_, c)| c.is_seat())
                .map(move |(i, c)| (SeatRef { row_label: row.label, letter: self.letters[i] }, *c))
        })
    }

    /// Classifies a seat. Fails when the designator does not name an installed seat.
    pub fn classify_seat(&self, seat: SeatRef) -> Result<SeatClass, CabinError> {
        let unresolved = |reason: &str| CabinError::UnresolvedSeat { seat: seat.to_string(), reason: reason.into() };
        let row = self.row(seat.row_label).ok_or_else(|| unresolved("unknown row"))?;
        let idx = self.letter_index(seat.letter).ok_or_else(|| unresolved("unknown letter"))?;
        if !row.cells[idx].is_seat() {
            return Err(unresolved("no seat installed at this position"));
        }
        Ok(SeatClass {
            lateral: self.lateral_of(idx),
            lastrow: self.last_seat_row() == Some(row.label),
            emergexit: row.exit,
            comfort: row.pitch_in > self.default_pitch_in,
        })
    }

    /// Renders the map back to `.smap` text.
    pub fn to_smap(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("aircraft: {}\n", self.aircraft_model));
        out.push_str(&format!("airline: {}\n", self.airline));
        let mut letters = String::new();
        for (i, l) in self.letters.iter().enumerate() {
            if i > 0 {
                letters.push(' ');
            }
            letters.push(*l);
            if self.aisle_after.contains(&i) {
                letters.push_str(" |");
            }
        }
        out.push_str(&format!("letters: {letters}\n"));
        out.push_str(&format!("default_pitch_in: {}\n", self.default_pitch_in));
        out.push_str(&format!("pitch_plus_in: {}\n", self.pitch_plus_in));
        out.push_str(&format!("refmax_rows: {}\n", self.refmax_rows));
        out.push_str(&format!("refmax_pitch_in: {}\n", self.refmax_pitch_in));
        for row in &self.rows {
            out.push_str(&format!("row {}", row.label));
            if row.explicit_pitch {
                out.push_str(&format!(" pitch={}", row.pitch_in));
            }
            if row.exit {
                out.push_str(" exit");
            }
            out.push(':');
            for c in &row.cells {
                out.push(' ');
                out.push_str(c.token());
            }
            out.push('\n');
        }
        out
    }
}

/// A boarding-pass seat designator such as `14F`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SeatRef {
    pub row_label: u32,
    pub letter: char,
}

impl SeatRef {
    pub fn new(row_label: u32, letter: char) -> Self {
        SeatRef { row_label, letter: letter.to_ascii_uppercase() }
    }
}

impl fmt::Display for SeatRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.row_label, self.letter)
    }
}

impl FromStr for SeatRef {
    type Err = CabinError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let bad = || CabinError::BadDesignator(s.to_string());
        let split = s.find(|c: char| !c.is_ascii_digit()).ok_or_else(bad)?;
        let (digits, rest) = s.split_at(split);
        let mut chars = rest.chars();
        let letter = chars.next().filter(|c| c.is_ascii_alphabetic()).ok_or_else(bad)?;
        if chars.next().is_some() || digits.is_empty() {
            return Err(bad());
        }
        Ok(SeatRef::new(digits.parse().map_err(|_| bad())?, letter))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Lateral {
    Window,
    Middle,
    Aisle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeatClass {
    pub lateral: Lateral,
    pub lastrow: bool,
    pub emergexit: bool,
    pub comfort: bool,
}
