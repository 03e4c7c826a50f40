use super::{CabinError, Cell, RowSpec, SeatMap};

#[derive(Default)]
struct Header {
    aircraft: Option<String>,
    airline: Option<String>,
    letters: Option<(Vec<char>, Vec<usize>)>,
    default_pitch_in: Option<f64>,
    pitch_plus_in: Option<f64>,
    refmax_rows: Option<u32>,
    refmax_pitch_in: Option<f64>,
}

/// Row line before pitch resolution: label, line, explicit pitch, exit, cells.
type RawRow = (u32, usize, Option<f64>, bool, Vec<Cell>);

/// Parses `.smap` text into a validated [`SeatMap`].
///
/// Header lines are `key: value`; each `row <label> [pitch=<in>] [exit]:`
/// line lists one cell token per seat letter (`1`, `1+`, `.`). Everything
/// after `#` is ignored.
pub fn parse_seatmap(source: &str) -> Result<SeatMap, CabinError> {
    let mut header = Header::default();
    let mut rows: Vec<RowSpec> = Vec::new();
    let mut raw_rows: Vec<RawRow> = Vec::new();

    for (idx, raw) in source.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let syntax = |message: String| CabinError::Syntax { line: line_no, message };

        if let Some(rest) = line.strip_prefix("row ").or_else(|| line.strip_prefix("row\t")) {
            let (spec, cells) =
                rest.split_once(':').ok_or_else(|| syntax("row line needs `:` before its cells".into()))?;
            let mut parts = spec.split_whitespace();
            let label: u32 = parts
                .next()
                .ok_or_else(|| syntax("row label missing".into()))?
                .parse()
                .map_err(|_| syntax(format!("row label `{}` is not an integer", spec.trim())))?;
            let mut pitch = None;
            let mut exit = false;
            for attr in parts {
                if attr == "exit" {
                    exit = true;
                } else if let Some(v) = attr.strip_prefix("pitch=") {
                    let p: f64 = v.parse().map_err(|_| syntax(format!("bad pitch `{v}`")))?;
                    if !(p.is_finite() && p > 0.0) {
                        return Err(syntax(format!("pitch must be positive, got {v}")));
                    }
                    pitch = Some(p);
                } else {
                    return Err(syntax(format!("unknown row attribute `{attr}`")));
                }
            }
            let cells = cells
                .split_whitespace()
                .map(|tok| match tok {
                    "1" => Ok(Cell::Seat),
                    "1+" => Ok(Cell::SeatPlus),
                    "." => Ok(Cell::Absent),
                    other => Err(syntax(format!("unknown cell token `{other}`"))),
                })
                .collect::<Result<Vec<_>, _>>()?;
            raw_rows.push((label, line_no, pitch, exit, cells));
            continue;
        }

        if !raw_rows.is_empty() {
            return Err(syntax("header lines must precede row lines".into()));
        }
        let (key, value) =
            line.split_once(':').ok_or_else(|| syntax(format!("expected `key: value`, got `{line}`")))?;
        let value = value.trim();
        let number = |v: &str| v.parse::<f64>().map_err(|_| syntax(format!("`{v}` is not a number")));
        match key.trim() {
            "aircraft" => header.aircraft = Some(value.to_string()),
            "airline" => header.airline = Some(value.to_string()),
            "letters" => header.letters = Some(parse_letters(value).map_err(syntax)?),
            "default_pitch_in" => header.default_pitch_in = Some(number(value)?),
            "pitch_plus_in" => header.pitch_plus_in = Some(number(value)?),
            "refmax_rows" => {
                header.refmax_rows = Some(value.parse().map_err(|_| syntax(format!("`{value}` is not a row count")))?)
            }
            "refmax_pitch_in" => header.refmax_pitch_in = Some(number(value)?),
            other => return Err(syntax(format!("unknown header key `{other}`"))),
        }
    }

    let (letters, aisle_after) = header.letters.ok_or(CabinError::MissingHeader("letters"))?;
    let default_pitch_in = header.default_pitch_in.ok_or(CabinError::MissingHeader("default_pitch_in"))?;
    let pitch_plus_in = header.pitch_plus_in.ok_or(CabinError::MissingHeader("pitch_plus_in"))?;

    let mut previous: Option<u32> = None;
    for (label, line, pitch, exit, cells) in raw_rows {
        if cells.len() != letters.len() {
            return Err(CabinError::CellCount { line, row: label, expected: letters.len(), found: cells.len() });
        }
        if let Some(p) = previous {
            if label <= p {
                return Err(CabinError::RowOrder { line, label, previous: p });
            }
        }
        previous = Some(label);
        let plus = cells.contains(&Cell::SeatPlus);
        let pitch_in = pitch.unwrap_or(if plus { pitch_plus_in } else { default_pitch_in });
        rows.push(RowSpec { label, cells, pitch_in, explicit_pitch: pitch.is_some(), exit });
    }

    let map = SeatMap {
        aircraft_model: header.aircraft.ok_or(CabinError::MissingHeader("aircraft"))?,
        airline: header.airline.ok_or(CabinError::MissingHeader("airline"))?,
        letters,
        aisle_after,
        default_pitch_in,
        pitch_plus_in,
        refmax_rows: header.refmax_rows.ok_or(CabinError::MissingHeader("refmax_rows"))?,
        refmax_pitch_in: header.refmax_pitch_in.ok_or(CabinError::MissingHeader("refmax_pitch_in"))?,
        rows,
    };
    map.validate()?;
    Ok(map)
}

fn parse_letters(value: &str) -> Result<(Vec<char>, Vec<usize>), String> {
    let mut letters = Vec::new();
    let mut aisles = Vec::new();
    for tok in value.split_whitespace() {
        if tok == "|" {
            if letters.is_empty() || aisles.last() == Some(&(letters.len() - 1)) {
                return Err("aisle separator must sit between two letters".into());
            }
            aisles.push(letters.len() - 1);
            continue;
        }
        let mut chars = tok.chars();
        match (chars.next(), chars.next()) {
            (Some(c), None) if c.is_ascii_alphabetic() => letters.push(c.to_ascii_uppercase()),
            _ => return Err(format!("seat letter `{tok}` must be a single letter")),
        }
    }
    if aisles.last().is_some_and(|&a| a + 1 == letters.len()) {
        return Err("aisle separator must sit between two letters".into());
    }
    Ok((letters, aisles))
}
