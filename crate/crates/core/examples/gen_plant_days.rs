//! Writes the bundled synthetic plant dataset (March through May, one row per
//! day) to stdout.
//!
//! cargo run -p boostfuse --example gen_plant_days > crates/core/data/plant_days.csv

use chrono::{Datelike, Duration, NaiveDate};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

const EXTRAS: [&str; 12] = [
    "outdoor_temp",
    "wet_bulb_temp",
    "relative_humidity",
    "solar_radiation",
    "chilled_water_supply_temp",
    "chilled_water_return_temp",
    "condenser_water_temp",
    "chiller_load_ratio",
    "chiller_run_hours",
    "occupancy_rate",
    "pump_frequency",
    "wind_speed",
];

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(20210301);
    let noise = Normal::new(0.0, 1.0).unwrap();
    let start = NaiveDate::from_ymd_opt(2021, 3, 1).unwrap();
    let end = NaiveDate::from_ymd_opt(2021, 5, 31).unwrap();

    let mut header = vec![
        "date",
        "host_daily_power",
        "chiller_pump_daily_power",
        "cooling_tower_daily_power",
        "room_daily_electricity",
        "system_daily_cooling",
    ];
    header.extend(EXTRAS);
    println!("{}", header.join(","));

    let mut day = start;
    while day <= end {
        let t = (day - start).num_days() as f64;
        let weekend = day.weekday().number_from_monday() >= 6;
        let outdoor = 19.0 + 0.04 * t + 4.0 * noise.sample(&mut rng);
        let humidity = (55.0 + 0.2 * t + 8.0 * noise.sample(&mut rng)).clamp(20.0, 98.0);
        let wet_bulb = outdoor - (100.0 - humidity) / 5.0 + 0.5 * noise.sample(&mut rng);
        let solar = (12.0 + 0.05 * t + 4.0 * noise.sample(&mut rng)).max(1.0);
        let wind = (3.0 + 1.2 * noise.sample(&mut rng)).abs();
        let occupancy = if weekend { 0.35 } else { 0.85 } + 0.05 * noise.sample(&mut rng);
        // a handful of shutdown days
        let off = rng.gen_bool(0.08) || (weekend && outdoor < 15.0);

        let mut row = vec![day.format("%Y-%m-%d").to_string()];
        if off {
            let standby = 40.0 + 5.0 * noise.sample(&mut rng).abs();
            row.extend(["0", "0", "0"].map(String::from));
            row.push(format!("{standby:.2}"));
            row.push("0".into());
            row.extend(
                [outdoor, wet_bulb, humidity, solar, 0.0, 0.0, 0.0, 0.0, 0.0]
                    .iter()
                    .map(|v| format!("{:.2}", v.max(0.0))),
            );
            row.push(format!("{:.3}", occupancy.max(0.0)));
            row.push("0".into());
            row.push(format!("{wind:.2}"));
        } else {
            let load = (0.55 * (outdoor - 8.0) + 0.35 * (wet_bulb - 6.0) + 0.25 * solar)
                .max(2.0)
                * (0.6 + 0.5 * occupancy);
            let cooling = 900.0 * load * (1.0 + 0.04 * noise.sample(&mut rng));
            let load_ratio = (load / 25.0).clamp(0.05, 1.0);
            let run_hours = (8.0 + 10.0 * load_ratio + noise.sample(&mut rng)).clamp(2.0, 24.0);
            let host = cooling / 5.2 * (1.0 + 0.05 * noise.sample(&mut rng));
            let pump = 0.18 * host + 20.0 * noise.sample(&mut rng).abs();
            let tower = 0.11 * host + 15.0 * noise.sample(&mut rng).abs();
            let room = host + pump + tower + 60.0 + 10.0 * noise.sample(&mut rng).abs();
            let supply = 7.0 + 0.6 * noise.sample(&mut rng);
            let ret = supply + 2.0 + 3.0 * load_ratio + 0.4 * noise.sample(&mut rng);
            let condenser = wet_bulb + 4.0 + 2.0 * load_ratio + 0.5 * noise.sample(&mut rng);
            let pump_freq = (30.0 + 18.0 * load_ratio + noise.sample(&mut rng)).min(50.0);
            row.extend(
                [host, pump, tower, room, cooling]
                    .iter()
                    .map(|v| format!("{:.2}", v.max(0.0))),
            );
            row.extend(
                [
                    outdoor, wet_bulb, humidity, solar, supply, ret, condenser,
                ]
                .iter()
                .map(|v| format!("{:.2}", v.max(0.0))),
            );
            row.push(format!("{load_ratio:.3}"));
            row.push(format!("{run_hours:.2}"));
            row.push(format!("{:.3}", occupancy.max(0.0)));
            row.push(format!("{pump_freq:.2}"));
            row.push(format!("{wind:.2}"));
        }
        println!("{}", row.join(","));
        day += Duration::days(1);
    }
}
