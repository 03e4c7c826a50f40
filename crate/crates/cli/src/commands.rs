use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use cabinfare::cabin::{
    capacity_from_zones, ipitch, ipitch_weighted, irowdens, parse_seatmap, CabinZone, DispersionTable, PitchWeighting,
    ReferenceMaxima, SeatMap,
};
use cabinfare::fixtures;
use cabinfare::lasso::{LassoConfig, LoadingsRefresh};
use cabinfare::study::{
    build_variables, check_recovery, load_csv_path, run_ladder, LoadOptions, SpecLadder, TableFormat, VariableOptions,
};
use cabinfare::synth::{emit_dataset, gen_market, MarketConfig, TrueParams};

use crate::settings::Settings;
use crate::{CabinCommand, Classify, DataArgs, Failure, LadderArgs, EXIT_ESTIMATION};

pub fn cabin(cmd: CabinCommand) -> Result<u8, Failure> {
    match cmd {
        CabinCommand::Parse { file, json } => {
            let map = read_seatmap(&file).data()?;
            if json {
                println!("{}", serde_json::to_string_pretty(&map).data()?);
            } else {
                print!("{}", summary(&map));
            }
        }
        CabinCommand::Indexes { file, refs } => {
            let mut map = read_seatmap(&file).data()?;
            if let Some(path) = refs {
                let text = read(&path).data()?;
                let refs = ReferenceMaxima::from_csv(&text).with_context(|| path.display().to_string()).data()?;
                map = refs.apply(&map).data()?;
            }
            println!("IROWDENS                {:.4}", irowdens(&map));
            println!("IPITCH                  {:.4}", ipitch(&map));
            println!("IPITCH (seat-weighted)  {:.4}", ipitch_weighted(&map, PitchWeighting::Seats));
        }
        CabinCommand::Dispersion { file, json } => {
            let text = read(&file).data()?;
            let table = DispersionTable::from_csv(&text).with_context(|| file.display().to_string()).data()?;
            if json {
                println!("{}", serde_json::to_string_pretty(&table).data()?);
            } else {
                print!("{}", table.render_text());
            }
        }
        CabinCommand::Capacity { zones } => {
            let zones: Vec<CabinZone> =
                zones.split(',').filter(|z| !z.trim().is_empty()).map(str::parse).collect::<Result<_, _>>().usage()?;
            if zones.is_empty() {
                return Err(anyhow!("no cabin zones given")).usage();
            }
            println!("{}", capacity_from_zones(&zones));
        }
    }
    Ok(0)
}

fn summary(map: &SeatMap) -> String {
    let mut letters = String::new();
    for (i, l) in map.letters.iter().enumerate() {
        letters.push(*l);
        if map.aisle_after.contains(&i) {
            letters.push_str(" |");
        }
        if i + 1 < map.letters.len() {
            letters.push(' ');
        }
    }
    let comfort = map.seats().filter(|(s, _)| map.classify_seat(*s).map(|c| c.comfort).unwrap_or(false)).count();
    let exits: Vec<String> = map.rows.iter().filter(|r| r.exit).map(|r| r.label.to_string()).collect();
    let mut out = String::new();
    let _ = writeln!(out, "aircraft    {}", map.aircraft_model);
    let _ = writeln!(out, "airline     {}", map.airline);
    let _ = writeln!(out, "letters     {letters}");
    let _ = writeln!(out, "seats       {}", map.seat_count());
    let _ = writeln!(out, "seat rows   {}", map.seat_row_count());
    let _ = writeln!(out, "comfort     {comfort}");
    let _ = writeln!(out, "exit rows   {}", if exits.is_empty() { "-".to_string() } else { exits.join(", ") });
    out
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn read_seatmap(path: &Path) -> Result<SeatMap> {
    let text = read(path)?;
    parse_seatmap(&text).with_context(|| path.display().to_string())
}

/// Every `*.smap` in `dir`, keyed by file stem.
pub fn load_maps(dir: &Path) -> Result<BTreeMap<String, SeatMap>> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("reading map directory {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "smap"))
        .collect();
    paths.sort();
    if paths.is_empty() {
        bail!("no .smap files in {}", dir.display());
    }
    let mut maps = BTreeMap::new();
    for p in paths {
        let stem = p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        maps.insert(stem, read_seatmap(&p)?);
    }
    Ok(maps)
}

pub fn synth_gen(
    seed: Option<u64>,
    market: Option<&Path>,
    out: Option<PathBuf>,
    settings: &Settings,
) -> Result<u8, Failure> {
    let mut cfg = match market {
        Some(path) => {
            let text = read(path).data()?;
            MarketConfig::from_kv(&text).with_context(|| path.display().to_string()).usage()?
        }
        None => MarketConfig::default(),
    };
    if let Some(s) = settings.pick(seed, "seed").usage()? {
        cfg.seed = s;
    }
    let out = settings.pick(out, "out").usage()?.ok_or_else(|| anyhow!("synth gen needs --out")).usage()?;
    let market = gen_market(&cfg).usage()?;
    let sidecar = emit_dataset(&market, &out).with_context(|| out.display().to_string()).data()?;
    eprintln!(
        "{} survey rows from {} flights (mean load factor {:.3}); truth in {}",
        market.records().len(),
        market.flights.len(),
        market.mean_load_factor(),
        sidecar.display()
    );
    Ok(0)
}

fn lasso_config(settings: &Settings) -> Result<LassoConfig> {
    let mut cfg = LassoConfig::default();
    if let Some(c) = settings.pick(None, "lasso_c")? {
        cfg.c = c;
    }
    if let Some(g) = settings.pick(None, "lasso_gamma")? {
        cfg.gamma = Some(g);
    }
    if let Some(r) = settings.pick::<String>(None, "lasso_refresh")? {
        cfg.refresh = match r.as_str() {
            "lasso" | "lasso_residuals" => LoadingsRefresh::LassoResiduals,
            "post_ols" | "ols" => LoadingsRefresh::PostOls,
            other => bail!("setting `lasso_refresh` = `{other}`: expected lasso_residuals or post_ols"),
        };
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Loads records, resolves seat maps and builds the estimation dataset.
fn prepare(args: &DataArgs, settings: &Settings) -> Result<cabinfare::data::Dataset, Failure> {
    let data = args.data.clone().ok_or_else(|| anyhow!("--data is required")).usage()?;
    let opts = LoadOptions {
        max_rejected_share: settings
            .pick_or(args.max_rejected_share, "max_rejected_share", LoadOptions::default().max_rejected_share)
            .usage()?,
    };
    let report = load_csv_path(&data, &opts).with_context(|| data.display().to_string()).data()?;
    if !report.rejected.is_empty() {
        eprintln!("{}: {} rows rejected", data.display(), report.rejected.len());
    }
    let maps = match settings.pick(args.maps.clone(), "maps").usage()? {
        Some(dir) => load_maps(&dir).data()?,
        None => fixtures::all_seatmaps(),
    };
    let vars = VariableOptions { log_adv: settings.pick_or(None, "adv_log", true).usage()?, ..Default::default() };
    build_variables(&report.records, &maps, &vars).with_context(|| data.display().to_string()).data()
}

/// Parses a ladder column selection such as `1..8`, `2-4`, `6` or `1,3,5`.
pub fn parse_columns(text: &str) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let range = part.split_once("..").or_else(|| part.split_once('-'));
        match range {
            Some((a, b)) => {
                let (a, b): (usize, usize) = (a.trim().parse()?, b.trim().parse()?);
                if a > b {
                    bail!("empty column range `{part}`");
                }
                out.extend(a..=b);
            }
            None => out.push(part.parse().with_context(|| format!("column `{part}`"))?),
        }
    }
    if out.is_empty() {
        bail!("no columns selected");
    }
    Ok(out)
}

pub fn estimate(args: &LadderArgs, settings: &Settings) -> Result<u8, Failure> {
    let columns = parse_columns(&settings.pick_or(args.spec.clone(), "spec", "1..8".to_string()).usage()?).usage()?;
    let ladder = SpecLadder::standard().select(&columns).usage()?;
    let format: TableFormat = settings
        .pick_or(args.format.clone(), "format", "text".to_string())
        .usage()?
        .parse()
        .map_err(|e: String| anyhow!(e))
        .usage()?;
    let lasso = lasso_config(settings).usage()?;
    let out = settings.pick(args.out.clone(), "out").usage()?;
    let data = prepare(&args.data, settings)?;
    let (table, results) = run_ladder(&data, &ladder, &lasso).estimation()?;
    let capped: Vec<&str> =
        ladder.columns.iter().zip(&results).filter(|(_, r)| !r.converged).map(|(c, _)| c.label.as_str()).collect();
    if !capped.is_empty() {
        log::warn!("columns {}: a selection step hit its iteration cap; last iterate used", capped.join(", "));
    }
    if log::log_enabled!(log::Level::Debug) {
        for (c, r) in ladder.columns.iter().zip(&results) {
            let eqs: Vec<_> = r.equations.iter().map(|e| (&e.response, &e.diagnostics)).collect();
            log::debug!("column {} selection: {}", c.label, serde_json::to_string(&eqs).unwrap_or_default());
        }
    }
    let rendered = table.render(format);
    match out {
        Some(path) => fs::write(&path, rendered).with_context(|| format!("writing {}", path.display())).data()?,
        None => print!("{rendered}"),
    }
    Ok(0)
}

pub fn estimate_check(args: &DataArgs, truth: Option<PathBuf>, settings: &Settings) -> Result<u8, Failure> {
    let truth_path = truth
        .or_else(|| args.data.as_deref().map(cabinfare::synth::truth_path))
        .ok_or_else(|| anyhow!("--truth is required"))
        .usage()?;
    let truth: TrueParams =
        serde_json::from_str(&read(&truth_path).data()?).with_context(|| truth_path.display().to_string()).data()?;
    let lasso = lasso_config(settings).usage()?;
    let data = prepare(args, settings)?;
    let report = check_recovery(&data, &truth, &lasso).estimation()?;
    print!("{}", report.render());
    Ok(if report.passed() { 0 } else { EXIT_ESTIMATION })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn column_selections() {
        assert_eq!(parse_columns("1..8").unwrap(), (1..=8).collect::<Vec<_>>());
        assert_eq!(parse_columns("6").unwrap(), vec![6]);
        assert_eq!(parse_columns("1, 3,5").unwrap(), vec![1, 3, 5]);
        assert_eq!(parse_columns("2-4,8").unwrap(), vec![2, 3, 4, 8]);
        assert!(parse_columns("4..2").is_err());
        assert!(parse_columns("x").is_err());
        assert!(parse_columns("").is_err());
    }

    #[test]
    fn summary_of_gol_177() {
        let s = summary(&fixtures::seatmap("gol_b738_177").unwrap());
        assert!(s.contains("seats       177"), "{s}");
        assert!(s.contains("comfort     42"), "{s}");
        assert!(s.contains("A B C | D E F"), "{s}");
    }
}
