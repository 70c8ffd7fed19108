use std::path::Path;
use std::time::Instant;

use super::{csv_writer, finish, fmt_sig};
use crate::error::{Error, Result};
use crate::event::{CameraGeometry, EventWindow, RefTime};
use crate::iwe::{accumulate_iwe, timestamp_image, IweOptions};
use crate::loss::{mean_timestamp_loss, LossKind, LossSpec};
use crate::synth::{gen_events, rotation_scene, Noise};
use crate::warp::Warp;

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub n_events: usize,
    pub width: usize,
    pub height: usize,
    /// Repetitions per timed operation; the median is reported.
    pub repetitions: usize,
    pub losses: Vec<LossKind>,
    pub seed: u64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self { n_events: 30_000, width: 240, height: 180, repetitions: 100, losses: LossKind::all(), seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    /// `warp+accumulate` or a loss name.
    pub name: String,
    pub n_events: usize,
    pub median_us: f64,
}

fn median_us(reps: usize, mut f: impl FnMut()) -> f64 {
    let mut t: Vec<f64> = (0..reps.max(1))
        .map(|_| {
            let start = Instant::now();
            f();
            start.elapsed().as_secs_f64() * 1e6
        })
        .collect();
    t.sort_by(f64::total_cmp);
    t[t.len() / 2]
}

/// Median wall time of warping and accumulating `n_events` rotation events,
/// and of every loss on the resulting IWE. Runs on a single thread.
pub fn run_bench(cfg: &BenchConfig) -> Result<Vec<BenchRow>> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().map_err(|e| Error::Config(e.to_string()))?;
    let cam = CameraGeometry::pinhole(cfg.width, cfg.height, cfg.width as f64 * 200.0 / 240.0);
    let omega = [0.8, -0.5, 1.5];
    let duration = 0.05;
    let rate = 2.0 * cfg.n_events as f64 / 2000.0 / duration * 12.0;
    let scene = rotation_scene(&cam, omega, 2000, duration, rate, Noise::default(), cfg.seed);
    let mut events = gen_events(&scene, &cam, cfg.seed)?.window.events;
    if events.len() < cfg.n_events {
        return Err(Error::Config(format!("benchmark scene produced only {} events", events.len())));
    }
    events.truncate(cfg.n_events);
    let window = EventWindow::new(events, RefTime::Mid);
    let warp = Warp::Rotation(cam);
    let opts = IweOptions::new(cfg.width, cfg.height);
    let theta = omega.to_vec();
    let n = cfg.n_events;

    pool.install(|| {
        let mut rows = Vec::with_capacity(cfg.losses.len() + 1);
        let warp_us = median_us(cfg.repetitions, || {
            std::hint::black_box(accumulate_iwe::<f64>(&window, &warp, &theta, &opts).ok());
        });
        rows.push(BenchRow { name: "warp+accumulate".into(), n_events: n, median_us: warp_us });
        let image = accumulate_iwe::<f64>(&window, &warp, &theta, &opts)?.image;
        let ts = timestamp_image::<f64>(&window, &warp, &theta, &opts)?;
        for &kind in &cfg.losses {
            let spec = LossSpec::new(kind);
            let us = if kind == LossKind::MeanTimestamp {
                median_us(cfg.repetitions, || {
                    std::hint::black_box(mean_timestamp_loss(&ts).ok());
                })
            } else {
                median_us(cfg.repetitions, || {
                    std::hint::black_box(spec.value(&image).ok());
                })
            };
            rows.push(BenchRow { name: spec.name(), n_events: n, median_us: us });
        }
        Ok(rows)
    })
}

/// `timing.csv` under `dir`.
pub fn write_bench_csv(rows: &[BenchRow], dir: &Path) -> Result<()> {
    let path = dir.join("timing.csv");
    let mut w = csv_writer(&path)?;
    w.write_record(["name", "n_events", "median_us"])?;
    for r in rows {
        w.write_record([r.name.clone(), r.n_events.to_string(), fmt_sig(r.median_us)])?;
    }
    finish(w, &path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_row_per_loss_plus_warp() {
        let cfg = BenchConfig { n_events: 2000, width: 60, height: 45, repetitions: 3, ..BenchConfig::default() };
        let rows = run_bench(&cfg).unwrap();
        assert_eq!(rows.len(), LossKind::all().len() + 1);
        assert_eq!(rows[0].name, "warp+accumulate");
        assert!(rows.iter().all(|r| r.median_us >= 0.0 && r.n_events == 2000));
    }
}
