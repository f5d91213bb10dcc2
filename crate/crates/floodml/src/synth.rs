//! Synthetic rainfall/flood data generator for desk-scale runs.
//!
//! Emits files in the exact external CSV formats the pipeline ingests. The
//! flood rule is known by construction: flood = YES iff the station-year's
//! generated annual total exceeds the threshold plus seeded noise, so
//! downstream learnability is controlled by the spec.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;
use thiserror::Error;

use crate::dataset::{DAYS_PER_MONTH, MONTHS_PER_YEAR};

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid synthetic spec: {0}")]
    InvalidSpec(String),
}

/// Shape of the generated data.
///
/// `monthly_intensity` scales expected rainfall per calendar month;
/// `flood_threshold = None` picks the median annual total so both classes
/// appear; `label_noise` is the standard deviation of the perturbation added
/// to the threshold per station-year (0 keeps the rule exact).
#[derive(Debug, Clone, Deserialize)]
#[serde(default)]
pub struct SynthSpec {
    pub stations: usize,
    pub start_year: i32,
    pub end_year: i32,
    pub monthly_intensity: Vec<f64>,
    pub flood_threshold: Option<f64>,
    pub label_noise: f64,
    pub missing_rate: f64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            stations: 4,
            start_year: 2011,
            end_year: 2020,
            // dry winter, heavy monsoon mid-year
            monthly_intensity: vec![
                0.5, 1.0, 2.0, 5.0, 9.0, 14.0, 16.0, 13.0, 10.0, 6.0, 1.5, 0.5,
            ],
            flood_threshold: None,
            label_noise: 0.0,
            missing_rate: 0.0,
        }
    }
}

impl SynthSpec {
    fn validate(&self) -> Result<(), SynthError> {
        if self.stations == 0 {
            return Err(SynthError::InvalidSpec("stations must be >= 1".into()));
        }
        if self.start_year > self.end_year {
            return Err(SynthError::InvalidSpec(format!(
                "start_year {} > end_year {}",
                self.start_year, self.end_year
            )));
        }
        if self.monthly_intensity.len() != MONTHS_PER_YEAR {
            return Err(SynthError::InvalidSpec(format!(
                "monthly_intensity needs {} entries, got {}",
                MONTHS_PER_YEAR,
                self.monthly_intensity.len()
            )));
        }
        if self.monthly_intensity.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(SynthError::InvalidSpec(
                "monthly_intensity entries must be finite and non-negative".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.missing_rate) {
            return Err(SynthError::InvalidSpec(format!(
                "missing_rate {} outside [0, 1]",
                self.missing_rate
            )));
        }
        if self.label_noise < 0.0 || !self.label_noise.is_finite() {
            return Err(SynthError::InvalidSpec(format!(
                "label_noise {} must be non-negative",
                self.label_noise
            )));
        }
        Ok(())
    }

    pub fn from_toml_str(text: &str) -> Result<SynthSpec, SynthError> {
        let spec: SynthSpec =
            toml::from_str(text).map_err(|e| SynthError::InvalidSpec(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }
}

fn station_name(index: usize) -> String {
    format!("Station{index:03}")
}

/// Crude zero-mean Gaussian draw (sum of uniforms), good enough for label
/// jitter.
fn gaussian(rng: &mut ChaCha8Rng, std: f64) -> f64 {
    let sum: f64 = (0..12).map(|_| rng.gen::<f64>()).sum();
    (sum - 6.0) * std
}

/// Generate the rainfall and flood CSVs. Deterministic per (spec, seed).
pub fn generate_synthetic(spec: &SynthSpec, seed: u64) -> Result<(String, String), SynthError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let years: Vec<i32> = (spec.start_year..=spec.end_year).collect();
    // values[station][year_idx][month][day]
    let mut values = Vec::with_capacity(spec.stations);
    let mut annuals = Vec::new();
    for _ in 0..spec.stations {
        let mut station_years = Vec::with_capacity(years.len());
        for _ in &years {
            let wetness = 0.6 + 0.8 * rng.gen::<f64>();
            let mut months = Vec::with_capacity(MONTHS_PER_YEAR);
            let mut annual: u64 = 0;
            for intensity in &spec.monthly_intensity {
                let mut days = [0u32; DAYS_PER_MONTH];
                for day in days.iter_mut() {
                    // roughly a third of days see rain, amount scales with
                    // the month's intensity
                    if rng.gen::<f64>() < 0.35 {
                        let amount = intensity * wetness * (1.0 + 4.0 * rng.gen::<f64>());
                        *day = amount.round() as u32;
                    }
                }
                annual += days.iter().map(|&d| u64::from(d)).sum::<u64>();
                months.push(days);
            }
            annuals.push(annual as f64);
            station_years.push(months);
        }
        values.push(station_years);
    }

    let threshold = match spec.flood_threshold {
        Some(t) => t,
        None => {
            let mut sorted = annuals.clone();
            sorted.sort_by(f64::total_cmp);
            sorted[sorted.len() / 2]
        }
    };

    let day_headers: Vec<String> = (1..=DAYS_PER_MONTH).map(|d| d.to_string()).collect();
    let mut rainfall = format!("Station,Year,Month,{}\n", day_headers.join(","));
    let mut flood = String::from("Station,Year,Flood\n");

    let mut annual_iter = annuals.iter();
    for (s, station_years) in values.iter().enumerate() {
        let name = station_name(s);
        for (y, months) in station_years.iter().zip(&years).map(|(m, &y)| (y, m)) {
            let annual = *annual_iter.next().expect("one annual per station-year");
            let label = if annual > threshold + gaussian(&mut rng, spec.label_noise) {
                "YES"
            } else {
                "NO"
            };
            flood.push_str(&format!("{name},{y},{label}\n"));
            for (m, days) in months.iter().enumerate() {
                let cells: Vec<String> = days
                    .iter()
                    .map(|&d| {
                        if rng.gen::<f64>() < spec.missing_rate {
                            // alternate missing tokens to exercise both forms
                            if rng.gen::<bool>() {
                                "NaN".to_string()
                            } else {
                                String::new()
                            }
                        } else {
                            d.to_string()
                        }
                    })
                    .collect();
                rainfall.push_str(&format!("{name},{y},{},{}\n", m + 1, cells.join(",")));
            }
        }
    }
    Ok((rainfall, flood))
}
