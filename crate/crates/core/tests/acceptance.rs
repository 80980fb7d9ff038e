use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use occloc_core::camera::panel_footprint_at;
use occloc_core::config::{ExperimentSpec, SweepParameter};
use occloc_core::localization::{distance_from_pixels, lateral_distance, longitudinal_offset};
use occloc_core::occ::{
    ber_s2psk, decode_frame, manchester_decode, manchester_encode, transmit_and_sample, S2pskWaveform,
};
use occloc_core::sim::report::{write_frames, write_fv, write_summary, write_sweep};
use occloc_core::sim::{run_pipeline, sweep, SweepTable};
use occloc_core::{CameraIntrinsics, LedPanelSpec};

const SEEDS: std::ops::RangeInclusive<u64> = 1..=10;
const SWEEP_BUDGET: Duration = Duration::from_secs(60);

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self { pass, detail: detail.into() }
    }
}

fn strictly_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

fn strictly_increasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] > w[0])
}

fn non_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] >= w[0])
}

fn timed_sweep(spec: &ExperimentSpec) -> (SweepTable, Duration) {
    let start = Instant::now();
    let table = sweep(spec).expect("sweep runs");
    (table, start.elapsed())
}

fn cm(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{:.1}", x * 100.0)).collect();
    parts.join(" ")
}

/// Forward (h, c, d) -> (a1, a2), then invert.
fn triangulation() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for _ in 0..10_000 {
        let h: f64 = rng.random_range(1.0..30.0);
        let d: f64 = rng.random_range(5.0..150.0);
        let c = rng.random_range(0.0..d);
        let a1 = (c * c + h * h).sqrt();
        let a2 = ((d + c) * (d + c) + h * h).sqrt();
        let err = match longitudinal_offset(a1, a2, d)
            .and_then(|off| lateral_distance(a1, off.c).map(|h2| (off.c, h2)))
        {
            Ok((c2, h2)) => ((c2 - c).hypot(h2 - h)) / c.hypot(h),
            Err(_) => f64::INFINITY,
        };
        worst = worst.max(err);
    }
    let elapsed = start.elapsed();
    Outcome::new(
        worst < 1e-9 && elapsed < Duration::from_secs(1),
        format!("worst relative error {worst:.2e}, {:.3} s", elapsed.as_secs_f64()),
    )
}

/// Rasterized range of a fronto-parallel panel at `d` whose image centre
/// sits at a random sub-pixel position; `None` when the panel covers no
/// pixel.
fn raster_range(
    panel: &LedPanelSpec,
    d: f64,
    intr: &CameraIntrinsics,
    rng: &mut ChaCha8Rng,
) -> Option<(f64, u64)> {
    let (u0, v0) = intr.principal_point;
    let center = (u0 + rng.random_range(0.0..1.0), v0 + rng.random_range(0.0..1.0));
    let fp = panel_footprint_at(panel, d, center, intr).ok()?;
    let est = distance_from_pixels(panel.area(), fp.pixel_count as f64, intr).ok()?;
    Some(((est - d).abs() / d, fp.pixel_count))
}

fn pitch_camera(focal: f64, pitch: f64) -> CameraIntrinsics {
    let width_px = (0.036 / pitch).round() as u32;
    let height_px = (0.024 / pitch).round() as u32;
    CameraIntrinsics {
        focal_length: focal,
        pixel_pitch: pitch,
        width_px,
        height_px,
        principal_point: (width_px as f64 / 2.0, height_px as f64 / 2.0),
        skew: 0.0,
        aperture_f_number: 4.0,
    }
}

/// Log-spaced distances over [5, 200] m, each at several random sub-pixel
/// phases.
fn ranging_round_trip() -> Outcome {
    let start = Instant::now();
    let intr = pitch_camera(0.016, 4e-6);
    let panel = LedPanelSpec::default();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut worst_400, mut worst_25) = (0.0f64, 0.0f64);
    let (mut n_400, mut n_25) = (0, 0);
    let (mut ok_400, mut ok_25) = (0, 0);
    let steps = 2000;
    for i in 0..=steps {
        let d = 5.0 * 40f64.powf(i as f64 / steps as f64);
        for _ in 0..4 {
            let Some((err, count)) = raster_range(&panel, d, &intr, &mut rng) else { continue };
            if count >= 400 {
                worst_400 = worst_400.max(err);
                n_400 += 1;
                ok_400 += usize::from(err <= 0.02);
            }
            if count >= 25 {
                worst_25 = worst_25.max(err);
                n_25 += 1;
                ok_25 += usize::from(err <= 0.10);
            }
        }
    }
    let elapsed = start.elapsed();
    Outcome::new(
        worst_400 <= 0.02 && worst_25 <= 0.10 && elapsed < Duration::from_secs(5),
        format!(
            "n >= 400: worst {:.2}%, {ok_400} of {n_400} within 2%; n >= 25: worst {:.2}%, {ok_25} of {n_25} within 10%; {:.2} s",
            worst_400 * 100.0,
            worst_25 * 100.0,
            elapsed.as_secs_f64()
        ),
    )
}

fn desk_ranging() -> Outcome {
    let intr = CameraIntrinsics::from_sensor(0.016, 0.036, 0.024, 10.0);
    let panel = LedPanelSpec::default();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let samples = 2000;
    let mut under = 0;
    for i in 0..samples {
        let d = 0.6 + 1.95 * i as f64 / (samples - 1) as f64;
        if let Some((err, _)) = raster_range(&panel, d, &intr, &mut rng) {
            if err < 0.01 {
                under += 1;
            }
        }
    }
    let share = under as f64 / samples as f64;
    Outcome::new(share >= 0.9, format!("{:.1}% of {samples} distances under 1% error", share * 100.0))
}

/// Manchester chips through the LED pair and back.
fn codec_round_trip(bits: &[u8], rng: &mut ChaCha8Rng) -> bool {
    let chips = manchester_encode(bits);
    let wf = S2pskWaveform::for_frame_rate(chips, 30.0, 5);
    let Ok(samples) = transmit_and_sample(&wf, 0.0, 30.0, rng) else { return false };
    let rx: Vec<u8> = samples.iter().map(decode_frame).collect();
    let decoded: Option<Vec<u8>> = manchester_decode(&rx).into_iter().collect();
    decoded.as_deref() == Some(bits)
}

fn codec() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut failures = 0;
    let mut exhaustive = 0;
    for len in 1..=12u32 {
        for word in 0..(1u32 << len) {
            let bits: Vec<u8> = (0..len).map(|i| ((word >> i) & 1) as u8).collect();
            exhaustive += 1;
            if !codec_round_trip(&bits, &mut rng) {
                failures += 1;
            }
        }
    }
    for _ in 0..1000 {
        let bits: Vec<u8> = (0..32).map(|_| rng.random_range(0..=1u8)).collect();
        if !codec_round_trip(&bits, &mut rng) {
            failures += 1;
        }
    }
    Outcome::new(
        failures == 0,
        format!("{failures} failures over {exhaustive} exhaustive and 1000 random strings"),
    )
}

fn ber_law() -> Outcome {
    let alpha = 1.0;
    let bits = 200_000usize;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut pass = true;
    let mut parts = Vec::new();
    for p_e in [0.01, 0.1, 0.3] {
        let data: Vec<u8> = (0..bits).map(|_| rng.random_range(0..=1u8)).collect();
        let wf = S2pskWaveform::for_frame_rate(data, 30.0, 5);
        let samples = transmit_and_sample(&wf, alpha * p_e, 30.0, &mut rng).expect("valid link");
        let errors = samples
            .iter()
            .zip(&wf.bit_sequence)
            .filter(|(s, b)| decode_frame(s) != **b)
            .count();
        let measured = errors as f64 / samples.len() as f64;
        let expected = ber_s2psk(p_e, alpha).expect("valid probability");
        let sigma = (expected * (1.0 - expected) / samples.len() as f64).sqrt();
        let z = (measured - expected) / sigma;
        pass &= z.abs() <= 3.0;
        parts.push(format!("p_e {p_e}: {measured:.5} vs {expected:.5} ({z:+.2} sigma)"));
    }
    let spec = ExperimentSpec::preset(SweepParameter::Sinr);
    let table = sweep(&spec).expect("sinr sweep runs");
    for s in &spec.series {
        let curve: Vec<f64> = table
            .ber_rows()
            .iter()
            .filter(|r| r.series == *s)
            .map(|r| r.ber_analytic)
            .collect();
        let ok = strictly_decreasing(&curve);
        pass &= ok;
        parts.push(format!("sigma_c {s} curve {}", if ok { "decreasing" } else { "not decreasing" }));
    }
    Outcome::new(pass, parts.join("; "))
}

/// Runs `parameter`'s preset under every panel seed and applies `check` to
/// the (avg, max) series of each.
fn seed_panel(
    parameter: SweepParameter,
    check: impl Fn(&[f64], &[f64]) -> Result<(), String>,
) -> (bool, Vec<String>, Duration) {
    let mut pass = true;
    let mut notes = Vec::new();
    let mut slowest = Duration::ZERO;
    for seed in SEEDS {
        let mut spec = ExperimentSpec::preset(parameter);
        spec.seed = seed;
        let (table, elapsed) = timed_sweep(&spec);
        slowest = slowest.max(elapsed);
        let avg: Vec<f64> = table.error_rows().iter().map(|r| r.stats.average_error).collect();
        let max: Vec<f64> = table.error_rows().iter().map(|r| r.stats.maximum_error).collect();
        if let Err(why) = check(&avg, &max) {
            pass = false;
            notes.push(format!("seed {seed}: {why}"));
        }
    }
    pass &= slowest < SWEEP_BUDGET;
    (pass, notes, slowest)
}

fn panel_outcome(pass: bool, notes: Vec<String>, slowest: Duration, summary: String) -> Outcome {
    let mut detail = format!("{summary}; slowest sweep {:.1} s", slowest.as_secs_f64());
    if !notes.is_empty() {
        detail.push_str("; ");
        detail.push_str(&notes.join("; "));
    }
    Outcome::new(pass, detail)
}

fn resolution() -> Outcome {
    let (pass, notes, slowest) = seed_panel(SweepParameter::Resolution, |avg, max| {
        if !strictly_decreasing(avg) || !strictly_decreasing(max) {
            return Err(format!("avg [{}] max [{}] cm", cm(avg), cm(max)));
        }
        let band = 0.05..=0.40;
        if !band.contains(&avg[0]) || !band.contains(&max[0]) {
            return Err(format!("1 MP avg {} max {} cm", cm(&avg[..1]), cm(&max[..1])));
        }
        Ok(())
    });
    panel_outcome(pass, notes, slowest, "avg and max strictly decreasing, 1 MP in [5, 40] cm".into())
}

fn exposure() -> Outcome {
    let (pass, notes, slowest) = seed_panel(SweepParameter::Exposure, |_, max| {
        let last = *max.last().unwrap();
        if !non_decreasing(max) || max.iter().any(|&m| m > last) {
            return Err(format!("max [{}] cm", cm(max)));
        }
        if !(0.09..=0.40).contains(&last) {
            return Err(format!("max at 1/15 s {} cm", cm(&[last])));
        }
        Ok(())
    });
    panel_outcome(pass, notes, slowest, "max non-decreasing, largest at 1/15 s within [9, 40] cm".into())
}

fn fv_speed() -> Outcome {
    let (pass, notes, slowest) = seed_panel(SweepParameter::FvSpeed, |avg, max| {
        if strictly_increasing(avg) && strictly_increasing(max) {
            Ok(())
        } else {
            Err(format!("avg [{}] max [{}] cm", cm(avg), cm(max)))
        }
    });
    panel_outcome(pass, notes, slowest, "avg and max strictly increasing with FV speed".into())
}

fn sl_spacing() -> Outcome {
    let spec = ExperimentSpec::preset(SweepParameter::SlSpacing);
    let (table, elapsed) = timed_sweep(&spec);
    let acc: Vec<f64> = table.error_rows().iter().map(|r| r.stats.accuracy_percent).collect();
    let (peak_at, peak) = acc
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::MIN), |best, (i, a)| if a > best.1 { (i, a) } else { best });
    let rises = peak_at > 0 && non_decreasing(&acc[..=peak_at]);
    let declines = peak_at + 1 < acc.len() && acc[peak_at + 1..].iter().all(|&a| a < peak)
        && acc.last() < acc.get(peak_at);
    let pass = rises && declines && (80.0..=95.0).contains(&peak) && elapsed < SWEEP_BUDGET;
    let series: Vec<String> = spec
        .values
        .iter()
        .zip(&acc)
        .map(|(v, a)| format!("{v} m {a:.1}%"))
        .collect();
    Outcome::new(
        pass,
        format!(
            "peak {peak:.1}% at {} m; {}; {:.1} s",
            spec.values[peak_at],
            series.join(", "),
            elapsed.as_secs_f64()
        ),
    )
}

fn run_csvs(spec: &ExperimentSpec) -> Vec<Vec<u8>> {
    let run = run_pipeline(&spec.base).expect("pipeline runs");
    let mut frames = Vec::new();
    let mut fv = Vec::new();
    let mut summary = Vec::new();
    write_frames(&mut frames, &run).unwrap();
    write_fv(&mut fv, &run).unwrap();
    write_summary(&mut summary, &run).unwrap();
    let mut table = Vec::new();
    write_sweep(&mut table, &sweep(spec).unwrap()).unwrap();
    vec![frames, fv, summary, table]
}

fn determinism() -> Outcome {
    let params = [
        SweepParameter::Resolution,
        SweepParameter::Exposure,
        SweepParameter::FvSpeed,
        SweepParameter::SlSpacing,
        SweepParameter::Sinr,
        SweepParameter::LedPower,
    ];
    let mut differing = Vec::new();
    for p in params {
        let mut spec = ExperimentSpec::preset(p);
        spec.trials = spec.trials.min(3);
        if run_csvs(&spec) != run_csvs(&spec) {
            differing.push(p.name());
        }
    }
    Outcome::new(
        differing.is_empty(),
        if differing.is_empty() {
            "frame, FV, summary and sweep CSVs byte-identical for every preset".to_string()
        } else {
            format!("differences in {}", differing.join(", "))
        },
    )
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("triangulation round trip", triangulation),
        ("rasterized ranging round trip", ranging_round_trip),
        ("desk-scale ranging within 1%", desk_ranging),
        ("S2-PSK codec identity", codec),
        ("BER law and BER-vs-SINR shape", ber_law),
        ("resolution sweep", resolution),
        ("exposure sweep", exposure),
        ("FV speed sweep", fv_speed),
        ("streetlight spacing sweep", sl_spacing),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = check();
        if !outcome.pass {
            failed += 1;
        }
        let tag = if outcome.pass { "PASS" } else { "FAIL" };
        println!("criterion {:>2} {tag}  {name}: {}", i + 1, outcome.detail);
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
