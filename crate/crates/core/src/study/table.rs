use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::regress::significance_stars;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub estimate: f64,
    pub se: f64,
    pub p: f64,
}

impl Cell {
    /// Four-decimal estimate with significance stars, e.g. `-0.0031***`.
    pub fn render(&self) -> String {
        format!("{}{}", round_half_away(self.estimate, 4), significance_stars(self.p))
    }
}

/// Selected / candidate counts for one control group, `None` when the group
/// is not part of the column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupRow {
    pub name: String,
    pub counts: Vec<Option<(usize, usize)>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionTable {
    pub columns: Vec<String>,
    pub rows: Vec<String>,
    /// `cells[row][column]`.
    pub cells: Vec<Vec<Option<Cell>>>,
    pub estimator: String,
    pub clusters: Vec<Option<usize>>,
    pub groups: Vec<GroupRow>,
    pub aic: Vec<Option<f64>>,
    pub bic: Vec<Option<f64>>,
    pub adj_r2: Vec<f64>,
    pub rmse: Vec<f64>,
    pub n: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TableFormat {
    Text,
    Tsv,
    Json,
}

impl FromStr for TableFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "text" | "txt" => Ok(TableFormat::Text),
            "tsv" => Ok(TableFormat::Tsv),
            "json" => Ok(TableFormat::Json),
            other => Err(format!("unknown table format `{other}` (text, tsv, json)")),
        }
    }
}

/// Decimal rounding half away from zero, applied to the shortest decimal
/// representation of `x` so that a value printed as `0.00305` rounds up.
pub fn round_half_away(x: f64, decimals: usize) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{:e}", x.abs());
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i64 = exp.parse().expect("integer exponent");
    let mut digits: Vec<u8> = mantissa.bytes().filter(u8::is_ascii_digit).map(|b| b - b'0').collect();
    // digits[0] has place value 10^exp; make sure at least one integer digit exists
    let mut int_len = exp + 1;
    if int_len <= 0 {
        let pad = (1 - int_len) as usize;
        digits.splice(0..0, std::iter::repeat_n(0, pad));
        int_len = 1;
    }
    let keep = int_len as usize + decimals;
    if digits.len() > keep {
        let round_up = digits[keep] >= 5;
        digits.truncate(keep);
        if round_up {
            let mut i = keep;
            loop {
                if i == 0 {
                    digits.insert(0, 1);
                    int_len += 1;
                    break;
                }
                i -= 1;
                if digits[i] == 9 {
                    digits[i] = 0;
                } else {
                    digits[i] += 1;
                    break;
                }
            }
        }
    }
    digits.resize(int_len as usize + decimals, 0);
    let to_str = |d: &[u8]| d.iter().map(|v| char::from(b'0' + v)).collect::<String>();
    let (int, frac) = digits.split_at(int_len as usize);
    let mut out = String::new();
    if x < 0.0 && digits.iter().any(|&d| d != 0) {
        out.push('-');
    }
    out.push_str(&to_str(int));
    if decimals > 0 {
        out.push('.');
        out.push_str(&to_str(frac));
    }
    out
}

/// Integer with thousands separators, e.g. `33,398`.
pub fn thousands(x: f64) -> String {
    let s = round_half_away(x, 0);
    let (sign, body) = s.strip_prefix('-').map(|b| ("-", b)).unwrap_or(("", s.as_str()));
    let mut out = String::new();
    for (i, c) in body.chars().enumerate() {
        if i > 0 && (body.len() - i) % 3 == 0 {
            out.push(',');
        }
        out.push(c);
    }
    format!("{sign}{out}")
}

impl RegressionTable {
    pub fn cell(&self, row: &str, column: usize) -> Option<&Cell> {
        let r = self.rows.iter().position(|x| x == row)?;
        self.cells[r][column].as_ref()
    }

    /// Rendered display rows: label followed by one string per column.
    fn display_rows(&self) -> Vec<Vec<String>> {
        let mut out = Vec::new();
        for (r, name) in self.rows.iter().enumerate() {
            let mut line = vec![name.clone()];
            line.extend(self.cells[r].iter().map(|c| c.map(|c| c.render()).unwrap_or_default()));
            out.push(line);
        }
        let row = |label: &str, vals: Vec<String>| {
            let mut l = vec![label.to_string()];
            l.extend(vals);
            l
        };
        let opt = |v: &[Option<f64>]| v.iter().map(|x| x.map(thousands).unwrap_or_else(|| "n/a".into())).collect();
        out.push(row("Estimator", vec![self.estimator.clone(); self.columns.len()]));
        out.push(row(
            "Airport-Pair Clusters",
            self.clusters.iter().map(|c| c.map(|c| thousands(c as f64)).unwrap_or_else(|| "No".into())).collect(),
        ));
        for g in &self.groups {
            out.push(row(
                &g.name,
                g.counts.iter().map(|c| c.map(|(k, m)| format!("{k}/{m}")).unwrap_or_else(|| "No".into())).collect(),
            ));
        }
        out.push(row("AIC Statistic", opt(&self.aic)));
        out.push(row("BIC Statistic", opt(&self.bic)));
        out.push(row("Adj R2 Statistic", self.adj_r2.iter().map(|v| round_half_away(*v, 4)).collect()));
        out.push(row("RMSE Statistic", self.rmse.iter().map(|v| round_half_away(*v, 4)).collect()));
        out.push(row("Nr Observations", self.n.iter().map(|&v| thousands(v as f64)).collect()));
        out
    }

    /// Aligned plain-text table.
    pub fn render_text(&self) -> String {
        let body = self.display_rows();
        let mut header = vec![String::new()];
        header.extend(self.columns.iter().cloned());
        let width =
            |i: usize| body.iter().chain(std::iter::once(&header)).map(|r| r[i].chars().count()).max().unwrap_or(0);
        let widths: Vec<usize> = (0..header.len()).map(width).collect();
        let n_coef = self.rows.len();
        let rule: String = "-".repeat(widths.iter().sum::<usize>() + 2 * (widths.len() - 1));
        let mut out = String::new();
        let line = |out: &mut String, r: &[String]| {
            let mut s = format!("{:<w$}", r[0], w = widths[0]);
            for (i, v) in r.iter().enumerate().skip(1) {
                let pad = widths[i] - v.chars().count();
                s.push_str("  ");
                s.push_str(&" ".repeat(pad));
                s.push_str(v);
            }
            out.push_str(s.trim_end());
            out.push('\n');
        };
        line(&mut out, &header);
        out.push_str(&rule);
        out.push('\n');
        for (i, r) in body.iter().enumerate() {
            if i == n_coef {
                out.push_str(&rule);
                out.push('\n');
            }
            line(&mut out, r);
        }
        out
    }

    /// Tab-separated values at full precision: estimate, standard error and
    /// p-value rows per regressor, then the footer.
    pub fn render_tsv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "row\tstat\t{}", self.columns.join("\t"));
        let full = |v: Option<f64>| v.map(|x| format!("{x:?}")).unwrap_or_default();
        for (r, name) in self.rows.iter().enumerate() {
            for (stat, get) in [("estimate", 0), ("se", 1), ("p", 2)] {
                let vals: Vec<String> =
                    self.cells[r].iter().map(|c| full(c.map(|c| [c.estimate, c.se, c.p][get]))).collect();
                let _ = writeln!(out, "{name}\t{stat}\t{}", vals.join("\t"));
            }
        }
        let join = |v: Vec<String>| v.join("\t");
        let _ = writeln!(out, "Estimator\tvalue\t{}", join(vec![self.estimator.clone(); self.columns.len()]));
        let _ = writeln!(
            out,
            "Airport-Pair Clusters\tvalue\t{}",
            join(self.clusters.iter().map(|c| c.map(|c| c.to_string()).unwrap_or_default()).collect())
        );
        for g in &self.groups {
            let vals = g.counts.iter().map(|c| c.map(|(k, m)| format!("{k}/{m}")).unwrap_or_default()).collect();
            let _ = writeln!(out, "{}\tvalue\t{}", g.name, join(vals));
        }
        let _ = writeln!(out, "AIC Statistic\tvalue\t{}", join(self.aic.iter().map(|v| full(*v)).collect()));
        let _ = writeln!(out, "BIC Statistic\tvalue\t{}", join(self.bic.iter().map(|v| full(*v)).collect()));
        let _ =
            writeln!(out, "Adj R2 Statistic\tvalue\t{}", join(self.adj_r2.iter().map(|v| full(Some(*v))).collect()));
        let _ = writeln!(out, "RMSE Statistic\tvalue\t{}", join(self.rmse.iter().map(|v| full(Some(*v))).collect()));
        let _ = writeln!(out, "Nr Observations\tvalue\t{}", join(self.n.iter().map(|v| v.to_string()).collect()));
        out
    }

    pub fn render_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("table serializes") + "\n"
    }

    pub fn render(&self, format: TableFormat) -> String {
        match format {
            TableFormat::Text => self.render_text(),
            TableFormat::Tsv => self.render_tsv(),
            TableFormat::Json => self.render_json(),
        }
    }
}
