//! Analytic latency model: wireless uplink rate, transmission delay,
//! fluid-queue compute delays, end-to-end latency, and the reward signal.
//!
//! All operations are pure functions in double precision. Compute nodes keep
//! their backlog as a value anchored at the last mutation time, so reading a
//! backlog at a later instant is a pure evaluation of the fluid drain
//! `L(t) = max(0, L₀ − f·(t − t₀))` and never perturbs subsequent state.

use crate::mobility::{distance, Vec2};
pub use crate::mobility::D_MIN_M;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("channel parameter `{name}` must be positive and finite, got {value}")]
    InvalidChannelParameter { name: &'static str, value: f64 },
    #[error("transmission rate must be positive, got {0}")]
    NonPositiveRate(f64),
    #[error("compute rate must be positive, got {0}")]
    NonPositiveComputeRate(f64),
    #[error("offload target {index} out of range for {server_count} servers")]
    InvalidAction { index: usize, server_count: usize },
}

/// V2I channel parameters for the log-distance path-loss uplink model.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct ChannelParams {
    /// Channel bandwidth B in Hz.
    pub bandwidth_hz: f64,
    /// Vehicle transmit power P in watts (1.0 W = 30 dBm).
    pub tx_power_w: f64,
    /// Path-loss exponent α.
    pub path_loss_alpha: f64,
    /// Background noise power σ² in watts.
    pub noise_power_w: f64,
}

impl Default for ChannelParams {
    fn default() -> Self {
        ChannelParams {
            bandwidth_hz: 1e6,
            tx_power_w: 1.0,
            path_loss_alpha: 4.0,
            noise_power_w: 1e-13,
        }
    }
}

impl ChannelParams {
    pub fn validate(&self) -> Result<(), ModelError> {
        let fields = [
            ("bandwidth_hz", self.bandwidth_hz),
            ("tx_power_w", self.tx_power_w),
            ("path_loss_alpha", self.path_loss_alpha),
            ("noise_power_w", self.noise_power_w),
        ];
        for (name, value) in fields {
            if !(value > 0.0) || !value.is_finite() {
                return Err(ModelError::InvalidChannelParameter { name, value });
            }
        }
        Ok(())
    }
}

/// d^α, using exact repeated multiplication for small integral exponents so
/// that doubling d with α = 4 scales the result by exactly 16.
fn pow_alpha(d: f64, alpha: f64) -> f64 {
    if alpha.fract() == 0.0 && (1.0..=16.0).contains(&alpha) {
        d.powi(alpha as i32)
    } else {
        d.powf(alpha)
    }
}

/// Received SNR `P·d^{−α}/σ²` at distance `d` (clamped at [`D_MIN_M`]).
pub fn channel_snr(ch: &ChannelParams, distance_m: f64) -> f64 {
    let d = distance_m.max(D_MIN_M);
    ch.tx_power_w / (pow_alpha(d, ch.path_loss_alpha) * ch.noise_power_w)
}

/// Uplink rate `B·log₂(1 + P·d^{−α}/σ²)` in bits/second.
///
/// Strictly positive for finite distances and monotonically non-increasing
/// in distance; distances below [`D_MIN_M`] are clamped.
pub fn uplink_rate(ch: &ChannelParams, distance_m: f64) -> Result<f64, ModelError> {
    ch.validate()?;
    Ok(uplink_rate_raw(ch, distance_m))
}

/// [`uplink_rate`] without parameter validation, for validated hot paths.
#[inline]
pub fn uplink_rate_raw(ch: &ChannelParams, distance_m: f64) -> f64 {
    ch.bandwidth_hz * (1.0 + channel_snr(ch, distance_m)).log2()
}

/// Transmission delay `b/r` in seconds for `size_bits` over `rate_bps`.
pub fn transmission_delay(size_bits: f64, rate_bps: f64) -> Result<f64, ModelError> {
    if !(rate_bps > 0.0) {
        return Err(ModelError::NonPositiveRate(rate_bps));
    }
    Ok(size_bits / rate_bps)
}

/// Server compute delay `(L + D)/f` in seconds.
pub fn server_compute_delay(
    backlog_cycles: f64,
    demand_cycles: f64,
    rate_hz: f64,
) -> Result<f64, ModelError> {
    if !(rate_hz > 0.0) {
        return Err(ModelError::NonPositiveComputeRate(rate_hz));
    }
    Ok((backlog_cycles + demand_cycles) / rate_hz)
}

/// Local compute delay; same fluid formula evaluated on the vehicle's node.
pub fn local_compute_delay(
    backlog_cycles: f64,
    demand_cycles: f64,
    rate_hz: f64,
) -> Result<f64, ModelError> {
    server_compute_delay(backlog_cycles, demand_cycles, rate_hz)
}

/// Reward for a completed task: the negated end-to-end latency.
pub fn reward(t_e2e: f64) -> f64 {
    -t_e2e
}

/// One of six task classes with a fixed compute demand and payload size.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct TaskType {
    pub id: usize,
    pub demand_cycles: f64,
    pub data_size_bits: f64,
}

/// A computation job emitted by one vehicle.
#[derive(Debug, Clone, PartialEq)]
pub struct Task {
    pub task_id: u64,
    pub vehicle_id: usize,
    pub type_id: usize,
    pub demand_cycles: f64,
    pub size_bits: f64,
    pub created_at: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeTier {
    Vehicle,
    ServerLow,
    ServerMid,
    ServerHigh,
}

/// A processing node (vehicle CPU or RSU server) with a fluid cycle backlog.
///
/// The backlog field holds the value at `anchor_time`; [`ComputeNode::backlog_at`]
/// evaluates the drained backlog at any later instant without mutating, and
/// state only changes on [`ComputeNode::reserve`] / [`ComputeNode::set_rate_at`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComputeNode {
    pub node_id: usize,
    pub tier: NodeTier,
    /// Rate before any degradation, used when capacities are restored.
    pub base_rate_hz: f64,
    rate_hz: f64,
    backlog_cycles: f64,
    anchor_time: f64,
    pub position: Vec2,
}

impl ComputeNode {
    pub fn new(node_id: usize, tier: NodeTier, rate_hz: f64, position: Vec2, at: f64) -> Self {
        ComputeNode {
            node_id,
            tier,
            base_rate_hz: rate_hz,
            rate_hz,
            backlog_cycles: 0.0,
            anchor_time: at,
            position,
        }
    }

    pub fn rate_hz(&self) -> f64 {
        self.rate_hz
    }

    /// Backlog at time `t ≥ anchor_time`: `max(0, L − f·(t − t₀))`. Pure.
    pub fn backlog_at(&self, t: f64) -> f64 {
        debug_assert!(t >= self.anchor_time, "backlog queried before anchor");
        (self.backlog_cycles - self.rate_hz * (t - self.anchor_time)).max(0.0)
    }

    /// Re-anchors the backlog at `t` (drains the elapsed interval).
    pub fn settle_to(&mut self, t: f64) {
        self.backlog_cycles = self.backlog_at(t);
        self.anchor_time = t;
    }

    /// Reserves `demand` cycles at time `t`, as offload assignment does.
    pub fn reserve(&mut self, t: f64, demand_cycles: f64) {
        self.settle_to(t);
        self.backlog_cycles += demand_cycles;
    }

    /// Changes the processing rate at time `t`; the interval before `t`
    /// drains at the old rate.
    pub fn set_rate_at(&mut self, t: f64, rate_hz: f64) {
        self.settle_to(t);
        self.rate_hz = rate_hz;
    }

    /// Restores state captured by a snapshot; anchors at `t`.
    pub fn restore(&mut self, t: f64, rate_hz: f64, backlog_cycles: f64) {
        self.rate_hz = rate_hz;
        self.backlog_cycles = backlog_cycles;
        self.anchor_time = t;
    }
}

/// Where a task executes: on its own vehicle or on server `j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OffloadAction {
    Local,
    Server(usize),
}

impl OffloadAction {
    /// Encodes as the flat action index: 0 = local, j+1 = server j.
    pub fn index(self) -> usize {
        match self {
            OffloadAction::Local => 0,
            OffloadAction::Server(j) => j + 1,
        }
    }

    pub fn from_index(index: usize, server_count: usize) -> Result<Self, ModelError> {
        match index {
            0 => Ok(OffloadAction::Local),
            j if j <= server_count => Ok(OffloadAction::Server(j - 1)),
            _ => Err(ModelError::InvalidAction {
                index,
                server_count,
            }),
        }
    }
}

/// Latency split of one assignment decision.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatencyBreakdown {
    pub t_trans: f64,
    pub t_comp: f64,
    pub t_e2e: f64,
}

/// End-to-end latency of executing `task` under `action`, evaluated against
/// the node states frozen at decision time `now`. Local execution pays the
/// vehicle's compute delay only; offloading pays uplink transmission at the
/// current vehicle-server distance plus the server's compute delay.
pub fn latency_breakdown(
    action: OffloadAction,
    task: &Task,
    vehicle: &ComputeNode,
    servers: &[ComputeNode],
    ch: &ChannelParams,
    now: f64,
) -> Result<LatencyBreakdown, ModelError> {
    match action {
        OffloadAction::Local => {
            let t_comp = local_compute_delay(
                vehicle.backlog_at(now),
                task.demand_cycles,
                vehicle.rate_hz(),
            )?;
            Ok(LatencyBreakdown {
                t_trans: 0.0,
                t_comp,
                t_e2e: t_comp,
            })
        }
        OffloadAction::Server(j) => {
            let server = servers.get(j).ok_or(ModelError::InvalidAction {
                index: j + 1,
                server_count: servers.len(),
            })?;
            let d = distance(vehicle.position, server.position);
            let rate = uplink_rate(ch, d)?;
            let t_trans = transmission_delay(task.size_bits, rate)?;
            let t_comp =
                server_compute_delay(server.backlog_at(now), task.demand_cycles, server.rate_hz())?;
            Ok(LatencyBreakdown {
                t_trans,
                t_comp,
                t_e2e: t_trans + t_comp,
            })
        }
    }
}

/// End-to-end latency in seconds; see [`latency_breakdown`].
pub fn end_to_end_latency(
    action: OffloadAction,
    task: &Task,
    vehicle: &ComputeNode,
    servers: &[ComputeNode],
    ch: &ChannelParams,
    now: f64,
) -> Result<f64, ModelError> {
    Ok(latency_breakdown(action, task, vehicle, servers, ch, now)?.t_e2e)
}
