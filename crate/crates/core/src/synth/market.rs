use std::collections::BTreeSet;

use chrono::{Days, NaiveDate};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, LogNormal, Normal, Poisson};
use rayon::prelude::*;

use super::{keyed_rng, Airport, Flight, MarketConfig, PassengerDraw, Route, SynthError, SynthOutput, TrueParams};
use crate::cabin::{ipitch, irowdens, Lateral, SeatMap, SeatRef};
use crate::fixtures;

const TAG_WORLD: u64 = 1;
const TAG_PROFILE: u64 = 2;
const TAG_FLIGHT: u64 = 3;
const TAG_PAX: u64 = 4;

const HOUR_WEIGHTS: [f64; 24] = [
    0.5, 0.3, 0.2, 0.2, 0.4, 2.0, 5.0, 7.0, 6.0, 5.0, 4.0, 4.0, 5.0, 5.0, 4.0, 4.0, 5.0, 6.0, 7.0, 6.0, 5.0, 4.0, 3.0,
    1.5,
];

const FIRST_SURVEY_DATE: (i32, u32, u32) = (2014, 1, 6);

fn lateral_slot(l: Lateral) -> usize {
    match l {
        Lateral::Aisle => 0,
        Lateral::Window => 1,
        Lateral::Middle => 2,
    }
}

const SLOT_LATERAL: [Lateral; 3] = [Lateral::Aisle, Lateral::Window, Lateral::Middle];

struct Cabin {
    id: String,
    airline: String,
    seats: Vec<(SeatRef, Lateral, bool)>,
    ln_irowdens: f64,
    ln_ipitch: f64,
}

impl Cabin {
    fn new(id: &str, map: &SeatMap) -> Result<Self, SynthError> {
        let mut seats = Vec::with_capacity(map.seat_count());
        for (seat, _) in map.seats() {
            let class = map.classify_seat(seat)?;
            seats.push((seat, class.lateral, class.comfort));
        }
        Ok(Cabin {
            id: id.to_string(),
            airline: map.airline.clone(),
            seats,
            ln_irowdens: irowdens(map).ln(),
            ln_ipitch: ipitch(map).ln(),
        })
    }
}

/// Everything shared by all flights.
struct World<'a> {
    cfg: &'a MarketConfig,
    cabins: Vec<Cabin>,
    airports: Vec<Airport>,
    routes: Vec<Route>,
    profile_tier: Vec<f64>,
    date_effect: Vec<f64>,
    date_fuel: Vec<f64>,
    hour_effect: [f64; 24],
}

fn airport_code(i: usize) -> String {
    let mut v = (i * 7919 + 17) % (26 * 26 * 26);
    let mut code = [b'A'; 3];
    for slot in code.iter_mut().rev() {
        *slot = b'A' + (v % 26) as u8;
        v /= 26;
    }
    String::from_utf8(code.to_vec()).unwrap()
}

fn normal(sd: f64) -> Normal<f64> {
    Normal::new(0.0, sd).expect("non-negative sd")
}

fn pick_weighted<R: Rng>(rng: &mut R, weights: &[f64]) -> usize {
    let total: f64 = weights.iter().sum();
    let mut u = rng.random::<f64>() * total;
    for (i, w) in weights.iter().enumerate() {
        if u < *w {
            return i;
        }
        u -= w;
    }
    weights.len() - 1
}

fn build_world(cfg: &MarketConfig) -> Result<World<'_>, SynthError> {
    let mut cabins = Vec::with_capacity(cfg.seatmap_pool.len());
    for id in &cfg.seatmap_pool {
        let map = fixtures::seatmap(id).ok_or_else(|| SynthError::UnknownSeatmap(id.clone()))?;
        cabins.push(Cabin::new(id, &map)?);
    }
    let airlines: Vec<String> = cabins.iter().map(|c| c.airline.clone()).collect::<BTreeSet<_>>().into_iter().collect();

    let mut rng = keyed_rng(cfg.seed, TAG_WORLD, 0, 0, 0);
    let airports: Vec<Airport> = (0..cfg.n_airports)
        .map(|i| Airport {
            code: airport_code(i),
            hub: i < cfg.n_hubs,
            effect: normal(cfg.airport_effect_sd).sample(&mut rng),
        })
        .collect();

    let dest_weights: Vec<f64> = airports.iter().map(|a| if a.hub { 6.0 } else { 1.0 }).collect();
    let dist = LogNormal::new(900f64.ln(), 0.45).unwrap();
    let share = Gamma::new(2.0, 1.0).unwrap();
    let mut pairs = BTreeSet::new();
    let mut routes = Vec::with_capacity(cfg.n_routes);
    let mut attempts = 0usize;
    while routes.len() < cfg.n_routes {
        let r = routes.len();
        attempts += 1;
        let pinned = r < cfg.n_airports && attempts < 1000;
        let origin = if pinned { r } else { rng.random_range(0..cfg.n_airports) };
        let destination = pick_weighted(&mut rng, &dest_weights);
        let key = (origin.min(destination), origin.max(destination));
        if origin == destination || pairs.contains(&key) {
            continue;
        }
        pairs.insert(key);
        attempts = 0;
        let n_carriers = 1 + pick_weighted(&mut rng, &[0.25, 0.4, 0.25, 0.1][..airlines.len().min(4)]);
        let mut names = airlines.clone();
        names.shuffle(&mut rng);
        names.truncate(n_carriers);
        names.sort();
        let raw: Vec<f64> = names.iter().map(|_| share.sample(&mut rng)).collect();
        let total: f64 = raw.iter().sum();
        let carriers: Vec<(String, f64)> = names.into_iter().zip(raw.iter().map(|s| s / total)).collect();
        let shares: Vec<f64> = carriers.iter().map(|c| c.1).collect();
        routes.push(Route {
            origin,
            destination,
            dist_km: dist.sample(&mut rng).clamp(150.0, 4000.0),
            rhhi: super::herfindahl(&shares),
            carriers,
            fuel_level: 2.5 * normal(0.12).sample(&mut rng).exp(),
            shock: normal(cfg.route_shock_sd).sample(&mut rng),
        });
    }

    let date_effect = (0..cfg.n_survey_dates).map(|_| normal(cfg.date_effect_sd).sample(&mut rng)).collect();
    let mut walk = 0.0;
    let date_fuel = (0..cfg.n_survey_dates)
        .map(|_| {
            walk = 0.9 * walk + normal(0.01).sample(&mut rng);
            f64::exp(walk)
        })
        .collect();
    let mut hour_effect = [0.0; 24];
    for h in hour_effect.iter_mut() {
        *h = normal(cfg.hour_effect_sd).sample(&mut rng);
    }
    let profile_tier = (0..cfg.n_profiles)
        .map(|p| normal(1.0).sample(&mut keyed_rng(cfg.seed, TAG_PROFILE, p as u64, 0, 0)))
        .collect();

    Ok(World { cfg, cabins, airports, routes, profile_tier, date_effect, date_fuel, hour_effect })
}

/// Passenger attributes drawn before the booking order is known.
struct Arrival {
    adv_days: u32,
    business: bool,
    hub: bool,
    profile: usize,
    ranking: [Lateral; 3],
    tiebreak: u64,
    seat_u: f64,
    noise: f64,
    surveyed: bool,
}

fn draw_arrival(world: &World, rng: &mut ChaCha8Rng, connect_p: f64) -> Arrival {
    let cfg = world.cfg;
    let business = rng.random_bool(cfg.business_share);
    let (median, sd) = if business {
        (cfg.business_adv_median, cfg.business_adv_log_sd)
    } else {
        (cfg.leisure_adv_median, cfg.leisure_adv_log_sd)
    };
    let adv = LogNormal::new(median.ln(), sd).unwrap().sample(rng).ceil().clamp(1.0, 365.0) as u32;
    let hub = rng.random_bool(connect_p);
    let profile = rng.random_range(0..cfg.n_profiles);
    let tier = world.profile_tier[profile];
    let weights = [cfg.aisle_weight, cfg.window_weight, cfg.middle_weight * (-cfg.middle_tier_slope * tier).exp()];
    let mut ranking = [Lateral::Middle; 3];
    let mut left: Vec<usize> = vec![0, 1, 2];
    for slot in ranking.iter_mut() {
        let w: Vec<f64> = left.iter().map(|&c| weights[c]).collect();
        let c = left.remove(pick_weighted(rng, &w));
        *slot = SLOT_LATERAL[c];
    }
    Arrival {
        adv_days: adv,
        business,
        hub,
        profile,
        ranking,
        tiebreak: rng.random(),
        seat_u: rng.random(),
        noise: normal(1.0).sample(rng),
        surveyed: rng.random_bool(cfg.survey_rate),
    }
}

fn simulate_flight(world: &World, route_idx: usize, flight_idx: usize) -> Flight {
    let cfg = world.cfg;
    let route = &world.routes[route_idx];
    let (r, f) = (route_idx as u64, flight_idx as u64);
    let mut rng = keyed_rng(cfg.seed, TAG_FLIGHT, r, f, 0);

    let shares: Vec<f64> = route.carriers.iter().map(|c| c.1).collect();
    let carrier = pick_weighted(&mut rng, &shares);
    let (airline, share) = &route.carriers[carrier];
    let fleet: Vec<&Cabin> = world.cabins.iter().filter(|c| &c.airline == airline).collect();
    let cabin = fleet[rng.random_range(0..fleet.len())];
    let seats = cabin.seats.len();

    let date = rng.random_range(0..cfg.n_survey_dates);
    let dep_hour = pick_weighted(&mut rng, &HOUR_WEIGHTS) as u8;
    let fltime_min = (20.0 + route.dist_km / 12.0) * normal(0.05).sample(&mut rng).exp();
    let shipment_kg = LogNormal::new(1500f64.ln(), 0.5).unwrap().sample(&mut rng);
    let fuelp = route.fuel_level * world.date_fuel[date] * normal(0.02).sample(&mut rng).exp();
    let dd = cfg.demand_dispersion;
    let mean_demand = cfg.demand_intensity * seats as f64 * (normal(dd).sample(&mut rng) - dd * dd / 2.0).exp();
    let demand = Poisson::new(mean_demand).unwrap().sample(&mut rng) as usize;

    // long itineraries are more often flown with a connection
    let connect_p = 0.08 + 0.17 * (route.dist_km / 2000.0).min(1.0);
    let arrivals: Vec<Arrival> = (0..demand)
        .map(|i| draw_arrival(world, &mut keyed_rng(cfg.seed, TAG_PAX, r, f, i as u64), connect_p))
        .collect();
    let mut order: Vec<usize> = (0..demand).collect();
    order.sort_by(|&a, &b| {
        let (x, y) = (&arrivals[a], &arrivals[b]);
        y.adv_days.cmp(&x.adv_days).then(x.tiebreak.cmp(&y.tiebreak))
    });
    let flown = demand.min(seats);

    let mut free: [Vec<usize>; 3] = Default::default();
    for (i, (_, lateral, _)) in cabin.seats.iter().enumerate() {
        free[lateral_slot(*lateral)].push(i);
    }

    let th = |name: &str| cfg.theta(name);
    let flight_part = cfg.base_log_price
        + th("DIST") * route.dist_km.ln()
        + th("FLTIME") * fltime_min.ln()
        + th("SHIPMENT") * shipment_kg.ln()
        + th("FUELP") * fuelp.ln()
        + th("SEATSH") * (100.0 * share).ln()
        + th("RHHI") * route.rhhi.ln()
        + th("IROWDENS") * cabin.ln_irowdens
        + th("IPITCH") * cabin.ln_ipitch
        + world.date_effect[date]
        + world.hour_effect[dep_hour as usize]
        + world.airports[route.origin].effect
        + world.airports[route.destination].effect
        + route.shock;

    let mut passengers = Vec::with_capacity(flown);
    for (k, &a) in order.iter().take(flown).enumerate() {
        let arr = &arrivals[a];
        let class = arr
            .ranking
            .iter()
            .map(|&l| lateral_slot(l))
            .find(|&c| !free[c].is_empty())
            .expect("a seat is free while bookings < seats");
        let pool = &mut free[class];
        let pick = ((arr.seat_u * pool.len() as f64) as usize).min(pool.len() - 1);
        let (seat, lateral, comfort) = cabin.seats[pool.swap_remove(pick)];
        let load_so_far = k as f64 / seats as f64;
        let log_price = flight_part
            + th("BSN") * f64::from(u8::from(arr.business))
            + th("HUB") * f64::from(u8::from(arr.hub))
            + cfg.rm_slope * load_so_far
            + cfg.profile_price_sd * world.profile_tier[arr.profile]
            + if lateral == Lateral::Middle { cfg.middle_seat_true_effect } else { 0.0 }
            + if comfort { cfg.comfort_true_effect } else { 0.0 }
            + cfg.sigma * arr.noise;
        passengers.push(PassengerDraw {
            adv_days: arr.adv_days,
            business: arr.business,
            hub: arr.hub,
            profile: arr.profile,
            ranking: arr.ranking,
            load_so_far,
            price: log_price.exp(),
            seat,
            lateral,
            surveyed: arr.surveyed,
        });
    }

    Flight {
        route: route_idx,
        airline: airline.clone(),
        seatmap_id: cabin.id.clone(),
        seats,
        date,
        dep_hour,
        fltime_min,
        shipment_kg,
        fuelp,
        demand,
        spilled: demand - flown,
        passengers,
    }
}

/// Generates a market. The result depends only on the config: flights are
/// simulated in parallel from independent keyed streams.
pub fn gen_market(cfg: &MarketConfig) -> Result<SynthOutput, SynthError> {
    cfg.validate()?;
    let world = build_world(cfg)?;
    let keys: Vec<(usize, usize)> =
        (0..cfg.n_routes).flat_map(|r| (0..cfg.flights_per_route).map(move |f| (r, f))).collect();
    let flights: Vec<Flight> = keys.par_iter().map(|&(r, f)| simulate_flight(&world, r, f)).collect();
    let spilled: usize = flights.iter().map(|f| f.spilled).sum();
    if spilled > 0 {
        log::info!("{spilled} passengers spilled from full flights");
    }
    let first = NaiveDate::from_ymd_opt(FIRST_SURVEY_DATE.0, FIRST_SURVEY_DATE.1, FIRST_SURVEY_DATE.2).unwrap();
    let dates = (0..cfg.n_survey_dates).map(|d| (first + Days::new(d as u64)).format("%Y-%m-%d").to_string()).collect();
    Ok(SynthOutput {
        config: cfg.clone(),
        truth: TrueParams::from_config(cfg),
        airports: world.airports,
        routes: world.routes,
        flights,
        dates,
    })
}
