//! Scenario files.
//!
//! A scenario is a TOML document with a `[scenario]` table, optional
//! `[receiver]` and `[loss]` tables, and one `[[path]]` table per path:
//!
//! ```toml
//! [scenario]
//! mode = "spns"            # or "mpns"
//! scheduler = "min_rtt"    # or "round_robin"
//! congestion_control = "cubic"
//! transfer_bytes = 20000000
//! seed = 1
//!
//! [receiver]
//! suppression = true
//! default_limit = 4
//!
//! [[path]]
//! rate_mbps = 40
//! delay_ms = 15
//!
//! [[path]]
//! trace = "cellular.trace"   # relative to the scenario file
//! delay_ms = 60
//! ```
//!
//! Times are in milliseconds. Omitted keys take the defaults of
//! [`ScenarioConfig`], whose paths are replaced wholesale by `[[path]]`.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::time::Duration;

use mpquic_pns::cc::{CcAlgorithm, CcConfig};
use mpquic_pns::experiment::ScenarioConfig;
use mpquic_pns::netsim::{LinkModel, Rate};
use mpquic_pns::receiver::{AckAnchor, RecvConfig};
use mpquic_pns::scheduler::SchedulerKind;
use mpquic_pns::sender::LossConfig;
use mpquic_pns::SpaceMode;
use serde::Deserialize;
use thiserror::Error;

use crate::trace::{load_trace, TraceError};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{0}")]
    Parse(#[from] toml::de::Error),
    #[error("{key}: {msg}")]
    Field { key: String, msg: &'static str },
    #[error(transparent)]
    Trace(#[from] TraceError),
    #[error(transparent)]
    Invalid(#[from] mpquic_pns::Error),
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct File {
    scenario: ScenarioTable,
    receiver: ReceiverTable,
    loss: LossTable,
    path: Vec<PathTable>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct ScenarioTable {
    mode: Option<SpaceMode>,
    scheduler: Option<SchedulerKind>,
    congestion_control: Option<CcAlgorithm>,
    transfer_bytes: Option<u64>,
    max_datagram_size: Option<u64>,
    initial_window_packets: Option<u64>,
    seed: Option<u64>,
    duration_cap_s: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct ReceiverTable {
    ack_eliciting_threshold: Option<u32>,
    max_ack_delay_ms: Option<f64>,
    suppression: Option<bool>,
    default_limit: Option<usize>,
    maximum_limit: Option<usize>,
    anchor: Option<AckAnchor>,
    retire_settled_ranges: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct LossTable {
    packet_threshold: Option<u64>,
    time_threshold: Option<[u32; 2]>,
    granularity_ms: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct PathTable {
    rate_mbps: Option<f64>,
    trace: Option<PathBuf>,
    delay_ms: Option<f64>,
    delay_down_ms: Option<f64>,
    delay_up_ms: Option<f64>,
    queue_packets: Option<usize>,
    loss_rate: Option<f64>,
    mtu: Option<u64>,
}

fn millis(key: String, ms: f64) -> Result<Duration, ConfigError> {
    if !(ms.is_finite() && ms >= 0.0) {
        return Err(ConfigError::Field {
            key,
            msg: "must be a non-negative number of milliseconds",
        });
    }
    Ok(Duration::from_micros((ms * 1000.0).round() as u64))
}

/// Reads and validates a scenario file. Trace paths are resolved relative to
/// the file's directory.
pub fn load_config(path: &Path) -> Result<ScenarioConfig, ConfigError> {
    let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_owned(),
        source,
    })?;
    parse_config(&text, path.parent().unwrap_or(Path::new(".")))
}

pub fn parse_config(text: &str, base_dir: &Path) -> Result<ScenarioConfig, ConfigError> {
    let file: File = toml::from_str(text)?;
    let mut cfg = ScenarioConfig::default();

    let s = file.scenario;
    cfg.mode = s.mode.unwrap_or(cfg.mode);
    cfg.scheduler = s.scheduler.unwrap_or(cfg.scheduler);
    cfg.cc = CcConfig {
        algorithm: s.congestion_control.unwrap_or(cfg.cc.algorithm),
        max_datagram_size: s.max_datagram_size.unwrap_or(cfg.cc.max_datagram_size),
        initial_window: s.initial_window_packets.unwrap_or(cfg.cc.initial_window),
        ..cfg.cc
    };
    cfg.transfer_size = s.transfer_bytes.unwrap_or(cfg.transfer_size);
    cfg.seed = s.seed.unwrap_or(cfg.seed);
    if let Some(secs) = s.duration_cap_s {
        cfg.duration_cap = millis("scenario.duration_cap_s".into(), secs * 1000.0)?;
    }

    let r = file.receiver;
    let d = RecvConfig::default();
    cfg.recv = RecvConfig {
        ack_eliciting_threshold: r.ack_eliciting_threshold.unwrap_or(d.ack_eliciting_threshold),
        max_ack_delay: match r.max_ack_delay_ms {
            Some(ms) => millis("receiver.max_ack_delay_ms".into(), ms)?,
            None => d.max_ack_delay,
        },
        suppression_enabled: r.suppression.unwrap_or(d.suppression_enabled),
        default_limit: r.default_limit.unwrap_or(d.default_limit),
        maximum_limit: r.maximum_limit.unwrap_or(d.maximum_limit),
        anchor: r.anchor.unwrap_or(d.anchor),
        retire_settled_ranges: r.retire_settled_ranges.unwrap_or(d.retire_settled_ranges),
    };

    let l = file.loss;
    let d = LossConfig::default();
    let [num, den] = l.time_threshold.unwrap_or([d.time_threshold_num, d.time_threshold_den]);
    cfg.loss = LossConfig {
        packet_threshold: l.packet_threshold.unwrap_or(d.packet_threshold),
        time_threshold_num: num,
        time_threshold_den: den,
        granularity: match l.granularity_ms {
            Some(ms) => millis("loss.granularity_ms".into(), ms)?,
            None => d.granularity,
        },
    };

    if !file.path.is_empty() {
        cfg.paths = file
            .path
            .into_iter()
            .enumerate()
            .map(|(i, p)| path_model(i, p, base_dir))
            .collect::<Result<_, _>>()?;
    }

    cfg.validate()?;
    Ok(cfg)
}

fn path_model(i: usize, p: PathTable, base_dir: &Path) -> Result<LinkModel, ConfigError> {
    let key = |k: &str| format!("path[{i}].{k}");
    let rate = match (p.rate_mbps, p.trace) {
        (Some(mbps), None) => Rate::Mbps(mbps),
        (None, Some(trace)) => Rate::Trace(load_trace(&base_dir.join(trace))?),
        _ => {
            return Err(ConfigError::Field {
                key: key("rate_mbps"),
                msg: "exactly one of rate_mbps and trace is required",
            })
        }
    };
    let shared_delay = || match p.delay_ms {
        Some(ms) => millis(key("delay_ms"), ms),
        None => Err(ConfigError::Field {
            key: key("delay_ms"),
            msg: "required",
        }),
    };
    let delay_down = match p.delay_down_ms {
        Some(ms) => millis(key("delay_down_ms"), ms)?,
        None => shared_delay()?,
    };
    let delay_up = match p.delay_up_ms {
        Some(ms) => millis(key("delay_up_ms"), ms)?,
        None => shared_delay()?,
    };
    let mut model = LinkModel::new(1.0, delay_down);
    model.delay_up = delay_up;
    model.rate = rate;
    model.queue_capacity = p.queue_packets.unwrap_or(model.queue_capacity);
    model.loss_rate = p.loss_rate.unwrap_or(model.loss_rate);
    model.mtu = p.mtu.unwrap_or(model.mtu);
    Ok(model)
}
