//! CSV and JSON export of run metrics.
//!
//! JSON is a single object mirroring [`MetricsReport`]. CSV is split into one
//! table per file, each with a header row; an empty table is just the header.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::Path;

use clap::ValueEnum;
use mpquic_pns::experiment::{range_count_cdf, ComparisonReport, MetricsReport, Series};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

type CsvResult = Result<(), csv::Error>;

pub fn write_json<W: Write, T: serde::Serialize>(value: &T, w: W) -> io::Result<()> {
    serde_json::to_writer_pretty(w, value).map_err(io::Error::from)
}

pub fn read_report_json<R: io::Read>(r: R) -> io::Result<MetricsReport> {
    serde_json::from_reader(r).map_err(io::Error::from)
}

/// Scalar metrics as `metric,value` rows.
pub fn write_summary_csv<W: Write>(m: &MetricsReport, w: W) -> CsvResult {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["metric", "value"])?;
    let mut row = |k: &str, v: String| out.write_record([k, &v]);
    row("mode", m.mode.to_string().to_lowercase())?;
    row("completion_time_s", m.completion_time.to_string())?;
    row("goodput_kBps", m.goodput.to_string())?;
    row("incomplete", m.incomplete.to_string())?;
    row("ack_frames", m.ack_frames.to_string())?;
    row("avg_ack_frame_size", m.avg_ack_frame_size.to_string())?;
    row("max_ranges_per_frame", m.max_ranges_per_frame.to_string())?;
    row("max_hole_count", m.max_hole_count.to_string())?;
    row("max_raw_holes", m.max_raw_holes.to_string())?;
    row("packet_threshold_losses", m.packet_threshold_losses.to_string())?;
    row("time_threshold_losses", m.time_threshold_losses.to_string())?;
    row("spurious_retx", m.spurious_retx.to_string())?;
    row("pto_count", m.pto_count.to_string())?;
    row("retransmissions", m.retransmissions.to_string())?;
    row("packets_received", m.packets_received.to_string())?;
    row("never_acknowledged", m.never_acknowledged.to_string())?;
    row("mixed_rtt_samples", m.mixed_rtt_samples.len().to_string())?;
    for (i, n) in m.data_packets_per_path.iter().enumerate() {
        row(&format!("data_packets_path{i}"), n.to_string())?;
    }
    for (i, n) in m.rtt_samples.iter().enumerate() {
        row(&format!("rtt_samples_path{i}"), n.len().to_string())?;
    }
    for (i, n) in m.samples_by_largest_path.iter().enumerate() {
        row(&format!("samples_largest_on_path{i}"), n.to_string())?;
    }
    for (i, s) in m.link_stats.iter().enumerate() {
        row(&format!("link{i}_dropped_queue"), s.dropped_queue.to_string())?;
        row(&format!("link{i}_dropped_loss"), s.dropped_loss.to_string())?;
    }
    out.flush()?;
    Ok(())
}

/// Per-path time series as `path,time_ms,value` rows.
pub fn write_series_csv<W: Write>(series: &[Series], w: W) -> CsvResult {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["path", "time_ms", "value"])?;
    for (path, s) in series.iter().enumerate() {
        for (t, v) in s {
            out.write_record([path.to_string(), t.to_string(), v.to_string()])?;
        }
    }
    out.flush()?;
    Ok(())
}

pub fn write_histogram_csv<W: Write>(histogram: &[u64], w: W) -> CsvResult {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["range_count", "frames"])?;
    for (n, c) in histogram.iter().enumerate().skip(1) {
        out.write_record([n.to_string(), c.to_string()])?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_cdf_csv<W: Write>(histogram: &[u64], w: W) -> CsvResult {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["range_count", "cdf"])?;
    for (n, f) in range_count_cdf(histogram) {
        out.write_record([n.to_string(), f.to_string()])?;
    }
    out.flush()?;
    Ok(())
}

/// One row per default limit; `inf` marks the unsuppressed run.
pub fn write_sweep_csv<W: Write>(sweep: &[(Option<usize>, MetricsReport)], w: W) -> CsvResult {
    let mut out = csv::Writer::from_writer(w);
    out.write_record([
        "default_limit",
        "avg_ack_frame_size",
        "goodput_kBps",
        "completion_time_s",
        "max_ranges_per_frame",
        "never_acknowledged",
    ])?;
    for (limit, m) in sweep {
        out.write_record([
            limit.map_or("inf".to_string(), |l| l.to_string()),
            m.avg_ack_frame_size.to_string(),
            m.goodput.to_string(),
            m.completion_time.to_string(),
            m.max_ranges_per_frame.to_string(),
            m.never_acknowledged.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_comparison_csv<W: Write>(cmp: &ComparisonReport, w: W) -> CsvResult {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["metric", "mpns", "spns", "rate_percent"])?;
    for (name, mpns, spns, rate) in cmp.rows() {
        out.write_record([name.to_string(), mpns.to_string(), spns.to_string(), rate.to_string()])?;
    }
    out.flush()?;
    Ok(())
}

fn create(path: &Path) -> io::Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new)
}

/// Writes every table of `m` into `dir` (created if needed).
pub fn write_report_csv_dir(m: &MetricsReport, dir: &Path) -> Result<(), csv::Error> {
    fs::create_dir_all(dir)?;
    write_summary_csv(m, create(&dir.join("summary.csv"))?)?;
    write_histogram_csv(&m.ack_range_count_histogram, create(&dir.join("ack_ranges.csv"))?)?;
    write_cdf_csv(&m.ack_range_count_histogram, create(&dir.join("ack_ranges_cdf.csv"))?)?;
    write_series_csv(&m.srtt_timeseries, create(&dir.join("srtt.csv"))?)?;
    write_series_csv(&m.rtt_samples, create(&dir.join("rtt_samples.csv"))?)?;
    write_series_csv(
        std::slice::from_ref(&m.mixed_rtt_samples),
        create(&dir.join("mixed_rtt_samples.csv"))?,
    )?;
    write_series_csv(&m.received_pn_timeline, create(&dir.join("received_pn.csv"))?)?;
    write_series_csv(
        std::slice::from_ref(&m.hole_count_timeline),
        create(&dir.join("holes.csv"))?,
    )?;
    Ok(())
}
