//! CSV output. Floats are written with a fixed number of decimals and
//! missing values as empty fields, so equal runs give equal bytes.

use std::io::Write;

use super::pipeline::PipelineOutput;
use super::sweep::SweepTable;
use crate::config::ErrorMetric;
use crate::scene::ms_to_kmh;

fn f(v: f64) -> String {
    format!("{v:.6}")
}

fn opt(v: Option<f64>) -> String {
    v.map(f).unwrap_or_default()
}

pub const FRAME_HEADER: [&str; 13] = [
    "frame",
    "time_s",
    "hv_status",
    "anchor_sl",
    "h_m",
    "c_m",
    "speed_kmh",
    "true_x_m",
    "true_y_m",
    "hv_error_m",
    "visible",
    "decoded",
    "measured",
];

pub fn write_frames<W: Write>(out: W, run: &PipelineOutput) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(FRAME_HEADER)?;
    for r in &run.frames {
        let hv = r.hv;
        w.write_record([
            r.frame.to_string(),
            f(r.time),
            r.hv_status.as_str().to_string(),
            hv.map(|s| s.anchor_sl.to_string()).unwrap_or_default(),
            opt(hv.map(|s| s.h)),
            opt(hv.map(|s| s.c)),
            opt(hv.map(|s| ms_to_kmh(s.speed_estimate))),
            opt(r.hv_truth.map(|t| t.0)),
            opt(r.hv_truth.map(|t| t.1)),
            opt(r.hv_error),
            r.visible.to_string(),
            r.decoded.to_string(),
            r.measured.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub const FV_HEADER: [&str; 18] = [
    "frame",
    "time_s",
    "fv_id",
    "range_m",
    "true_range_m",
    "range_error_m",
    "bearing_deg",
    "rel_x_m",
    "rel_y_m",
    "world_x_m",
    "world_y_m",
    "true_world_x_m",
    "true_world_y_m",
    "world_error_m",
    "position_error_m",
    "relative_speed_mps",
    "collision_flag",
    "true_collision",
];

pub fn write_fv<W: Write>(out: W, run: &PipelineOutput) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(FV_HEADER)?;
    for r in &run.fv {
        let e = r.estimate;
        let world = e.and_then(|e| e.world_estimate);
        w.write_record([
            r.frame.to_string(),
            f(r.time),
            r.fv_id.to_string(),
            opt(e.map(|e| e.range)),
            f(r.true_range),
            opt(r.range_error),
            opt(e.map(|e| e.bearing.to_degrees())),
            opt(e.map(|e| e.relative.x)),
            opt(e.map(|e| e.relative.y)),
            opt(world.map(|p| p.x)),
            opt(world.map(|p| p.y)),
            opt(r.true_world.map(|t| t.0)),
            opt(r.true_world.map(|t| t.1)),
            opt(r.world_error),
            opt(r.position_error),
            opt(e.map(|e| e.relative_speed)),
            e.map(|e| e.collision_flag.to_string()).unwrap_or_default(),
            r.true_collision.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// One row per error metric.
pub fn write_summary<W: Write>(out: W, run: &PipelineOutput) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["metric", "avg_error_cm", "max_error_cm", "accuracy_percent", "samples", "total"])?;
    for (name, metric) in [
        ("hv_position", ErrorMetric::HvPosition),
        ("fv_range", ErrorMetric::FvRange),
        ("fv_world", ErrorMetric::FvWorld),
        ("fv_position", ErrorMetric::FvPosition),
    ] {
        let s = run.stats(metric);
        w.write_record([
            name.to_string(),
            f(s.average_error * 100.0),
            f(s.maximum_error * 100.0),
            f(s.accuracy_percent),
            s.sample_count.to_string(),
            s.total_count.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_sweep<W: Write>(out: W, table: &SweepTable) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let name = table.parameter().name();
    match table {
        SweepTable::Error { rows, .. } => {
            w.write_record([
                "parameter",
                "value",
                "avg_error_cm",
                "max_error_cm",
                "accuracy_percent",
                "samples",
            ])?;
            for r in rows {
                w.write_record([
                    name.to_string(),
                    f(r.value),
                    f(r.stats.average_error * 100.0),
                    f(r.stats.maximum_error * 100.0),
                    f(r.stats.accuracy_percent),
                    r.stats.sample_count.to_string(),
                ])?;
            }
        }
        SweepTable::Ber { rows, .. } => {
            w.write_record(["parameter", "value", "series", "ber_analytic", "ber_monte_carlo", "bits"])?;
            for r in rows {
                w.write_record([
                    name.to_string(),
                    f(r.value),
                    f(r.series),
                    format!("{:.6e}", r.ber_analytic),
                    format!("{:.6e}", r.ber_monte_carlo),
                    r.bits.to_string(),
                ])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}
