use cabinfare::fixtures;
use cabinfare::lasso::LassoConfig;
use cabinfare::study::{build_variables, load_csv, run_ladder, LoadOptions, SpecLadder, StudyRecord, VariableOptions};
use cabinfare::synth::{gen_market, write_csv, MarketConfig};

fn small_market(seed: u64) -> MarketConfig {
    MarketConfig {
        seed,
        n_routes: 40,
        flights_per_route: 10,
        n_airports: 20,
        n_hubs: 3,
        survey_rate: 0.15,
        ..MarketConfig::default()
    }
}

fn to_csv(records: &[StudyRecord]) -> Vec<u8> {
    let mut buf = Vec::new();
    write_csv(&mut buf, records).unwrap();
    buf
}

#[test]
fn emitted_csv_loads_back_unchanged() {
    let records = gen_market(&small_market(11)).unwrap().records();
    let report = load_csv(to_csv(&records).as_slice(), &LoadOptions::default()).unwrap();
    assert!(report.rejected.is_empty(), "{:?}", &report.rejected[..report.rejected.len().min(3)]);
    assert_eq!(report.records, records);
}

#[test]
fn same_inputs_render_the_same_table() {
    let maps = fixtures::all_seatmaps();
    let ladder = SpecLadder::standard();
    let lasso = LassoConfig::default();
    let render = |records: &[StudyRecord]| {
        let ds = build_variables(records, &maps, &VariableOptions::default()).unwrap();
        let (table, _) = run_ladder(&ds, &ladder, &lasso).unwrap();
        (table.render_text(), table.render_json())
    };
    let direct = gen_market(&small_market(12)).unwrap().records();
    let loaded = load_csv(to_csv(&direct).as_slice(), &LoadOptions::default()).unwrap().records;
    let regenerated = gen_market(&small_market(12)).unwrap().records();
    let first = render(&direct);
    assert_eq!(first, render(&loaded));
    assert_eq!(first, render(&regenerated));
}

/// AIC and RMSE fall (weakly) from column (1) to (8) on default markets.
#[test]
fn ladder_fit_improves_column_by_column() {
    let maps = fixtures::all_seatmaps();
    for seed in 1..=3 {
        let records = gen_market(&MarketConfig { seed, ..MarketConfig::default() }).unwrap().records();
        let ds = build_variables(&records, &maps, &VariableOptions::default()).unwrap();
        let (table, _) = run_ladder(&ds, &SpecLadder::standard(), &LassoConfig::default()).unwrap();
        let aic: Vec<f64> = table.aic.iter().map(|a| a.unwrap()).collect();
        for w in aic.windows(2) {
            assert!(w[1] <= w[0], "seed {seed}: AIC {aic:?}");
        }
        for w in table.rmse.windows(2) {
            assert!(w[1] <= w[0], "seed {seed}: RMSE {:?}", table.rmse);
        }
    }
}
