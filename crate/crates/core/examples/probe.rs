// Scratch calibration probe for the detection experiments.

use tsad_core::basis::FeatureConfig;
use tsad_core::experiment::{multi_run, run_once, ExperimentSettings};
use tsad_core::pipeline::{inject_anomalies, synthesize_base, SynthSpec};

fn base_series(seed: u64) -> tsad_core::pipeline::Series {
    let spec = SynthSpec {
        length: 20_000,
        base_period: 48,
        noise_std: 0.05,
        anomaly_ratio: 0.0,
        peak_magnitude: 0.0,
        seed,
    };
    synthesize_base(&spec).unwrap()
}

fn main() {
    // Criterion 5 worst case: 10% train contamination, test spikes 1%.
    let mut series = base_series(1);
    inject_anomalies(&mut series, 10_000..20_000, 0.01, 0.4, 42).unwrap();
    inject_anomalies(&mut series, 0..10_000, 0.10, 0.4, 43).unwrap();
    let settings = ExperimentSettings {
        difference: false,
        ..ExperimentSettings::default()
    };
    let t0 = std::time::Instant::now();
    let summary = multi_run(&series, &settings, &[0, 1]).unwrap();
    println!("train ratio 10% ({:?})", t0.elapsed());
    for (name, m) in &summary.metrics {
        println!("  {name}: {:.4} +/- {:.4}", m.mean, m.std);
    }

    // Criterion 10: T=16 at N=2, difference off.
    let mut series = base_series(1);
    inject_anomalies(&mut series, 10_000..20_000, 0.01, 0.4, 42).unwrap();
    let small_t = ExperimentSettings {
        feature: FeatureConfig::new(2, 16),
        difference: false,
        ..ExperimentSettings::default()
    };
    let out = run_once(&series, &small_t, 0).unwrap();
    println!("T=16: auprc {:.6}", out.report.auprc);

    // Criterion 6: linear trend, slope 0.5 per period (48 points).
    let mut trended = base_series(2);
    for (t, v) in trended.values.iter_mut().enumerate() {
        *v += 0.5 * t as f64 / 48.0;
    }
    inject_anomalies(&mut trended, 10_000..20_000, 0.01, 0.4, 44).unwrap();
    for difference in [false, true] {
        let settings = ExperimentSettings {
            difference,
            ..ExperimentSettings::default()
        };
        let t0 = std::time::Instant::now();
        let out = run_once(&trended, &settings, 0).unwrap();
        println!(
            "trend difference={difference}: auprc {:.4} event_f1 {:.4} ({:?})",
            out.report.auprc,
            out.report.event_f1.f1,
            t0.elapsed()
        );
    }
}
