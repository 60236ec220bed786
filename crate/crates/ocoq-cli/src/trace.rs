//! Run traces and their on-disk format.
//!
//! A trace is line-delimited JSON: one meta record carrying the resolved
//! parameters and the full config document, then one record per slot. Every
//! float is rendered in scientific notation with 17 significant digits,
//! which round-trips `f64` exactly, so persist → load → persist is
//! byte-identical.

use std::io::{BufRead, Write};

use serde::Deserialize;

use ocoq_core::solver::{FrameInfo, SlotRecord};

use crate::config::SolverVariant;
use crate::error::{HarnessError, Result};

/// 17 significant digits: enough to reproduce any f64 bit pattern.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_vec(xs: &[f64]) -> String {
    let mut out = String::from("[");
    for (i, x) in xs.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str(&fmt_f64(*x));
    }
    out.push(']');
    out
}

fn fmt_opt(x: Option<f64>) -> String {
    match x {
        Some(v) => fmt_f64(v),
        None => "null".to_string(),
    }
}

/// FNV-1a over the config text; cheap content digest for metadata.
pub fn digest(text: &str) -> String {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in text.as_bytes() {
        h ^= *b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    format!("{h:016x}")
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceMeta {
    pub variant: SolverVariant,
    pub seed: u64,
    pub horizon: u64,
    pub dimension: usize,
    pub num_constraints: usize,
    pub v: Option<f64>,
    pub alpha: Option<f64>,
    pub step: Option<f64>,
    pub config_digest: String,
    pub config_text: String,
    pub frames: Option<Vec<FrameInfo>>,
}

/// A complete run: metadata, per-slot records, and running prefix sums of
/// the objective, each constraint, and the squared steps.
#[derive(Debug, Clone, PartialEq)]
pub struct RunTrace {
    pub meta: TraceMeta,
    pub records: Vec<SlotRecord>,
    objective_prefix: Vec<f64>,
    constraint_prefix: Vec<Vec<f64>>,
    step_sq_prefix: Vec<f64>,
}

impl RunTrace {
    pub fn new(meta: TraceMeta, records: Vec<SlotRecord>) -> Self {
        let (objective_prefix, constraint_prefix, step_sq_prefix) =
            prefix_sums(&records, meta.num_constraints);
        RunTrace {
            meta,
            records,
            objective_prefix,
            constraint_prefix,
            step_sq_prefix,
        }
    }

    pub fn horizon(&self) -> u64 {
        self.records.len() as u64
    }

    /// `Σ_{t<T} f_t(X_t)`.
    pub fn objective_sum(&self, t: u64) -> f64 {
        if t == 0 {
            0.0
        } else {
            self.objective_prefix[t as usize - 1]
        }
    }

    /// `Σ_{t<T} g_{t,i}(X_t)`.
    pub fn constraint_sum(&self, i: usize, t: u64) -> f64 {
        if t == 0 {
            0.0
        } else {
            self.constraint_prefix[i][t as usize - 1]
        }
    }

    /// `Σ_{t=1..T} ‖X_t − X_{t-1}‖²`.
    pub fn step_sq_sum(&self, t: u64) -> f64 {
        if t == 0 {
            0.0
        } else {
            self.step_sq_prefix[t as usize - 1]
        }
    }

    /// Recomputes the prefix sums from the records and compares exactly.
    pub fn prefix_sums_consistent(&self) -> bool {
        let (obj, con, step) = prefix_sums(&self.records, self.meta.num_constraints);
        obj == self.objective_prefix && con == self.constraint_prefix && step == self.step_sq_prefix
    }

    pub fn write<W: Write>(&self, mut w: W) -> Result<()> {
        let io_err = |source| HarnessError::Io {
            path: "<trace>".into(),
            source,
        };
        let m = &self.meta;
        let frames = match &m.frames {
            None => "null".to_string(),
            Some(fs) => {
                let mut out = String::from("[");
                for (i, f) in fs.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    out.push_str(&format!(
                        "{{\"start\":{},\"len\":{},\"epsilon\":{},\"v\":{},\"alpha\":{}}}",
                        f.start,
                        f.len,
                        fmt_f64(f.epsilon),
                        fmt_f64(f.v),
                        fmt_f64(f.alpha)
                    ));
                }
                out.push(']');
                out
            }
        };
        writeln!(
            w,
            "{{\"kind\":\"meta\",\"variant\":\"{}\",\"seed\":{},\"horizon\":{},\"dim\":{},\"constraints\":{},\"v\":{},\"alpha\":{},\"step\":{},\"config_digest\":\"{}\",\"config\":{},\"frames\":{}}}",
            m.variant.as_str(),
            m.seed,
            m.horizon,
            m.dimension,
            m.num_constraints,
            fmt_opt(m.v),
            fmt_opt(m.alpha),
            fmt_opt(m.step),
            m.config_digest,
            serde_json::to_string(&m.config_text).expect("string serialization"),
            frames,
        )
        .map_err(io_err)?;
        for r in &self.records {
            writeln!(
                w,
                "{{\"kind\":\"slot\",\"t\":{},\"x\":{},\"f\":{},\"g\":{},\"q\":{},\"q_next\":{},\"drift\":{},\"dx2\":{}}}",
                r.slot,
                fmt_vec(&r.decision),
                fmt_f64(r.objective_value),
                fmt_vec(&r.constraint_values),
                fmt_vec(&r.queues),
                fmt_vec(&r.queues_next),
                fmt_f64(r.drift),
                fmt_f64(r.step_sq),
            )
            .map_err(io_err)?;
        }
        Ok(())
    }

    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|source| HarnessError::Io {
            path: path.display().to_string(),
            source,
        })?;
        self.write(std::io::BufWriter::new(file))
    }

    pub fn read<R: BufRead>(r: R) -> Result<RunTrace> {
        let mut meta: Option<TraceMeta> = None;
        let mut records = Vec::new();
        for (lineno, line) in r.lines().enumerate() {
            let line = line.map_err(|source| HarnessError::Io {
                path: "<trace>".into(),
                source,
            })?;
            if line.trim().is_empty() {
                continue;
            }
            let kind: KindLine = serde_json::from_str(&line)
                .map_err(|e| HarnessError::Config(format!("trace line {}: {e}", lineno + 1)))?;
            match kind.kind.as_str() {
                "meta" => {
                    let m: MetaLine = serde_json::from_str(&line)
                        .map_err(|e| HarnessError::Config(format!("trace meta: {e}")))?;
                    let variant = SolverVariant::parse(&m.variant).ok_or_else(|| {
                        HarnessError::Config(format!("trace meta: unknown variant {}", m.variant))
                    })?;
                    meta = Some(TraceMeta {
                        variant,
                        seed: m.seed,
                        horizon: m.horizon,
                        dimension: m.dim,
                        num_constraints: m.constraints,
                        v: m.v,
                        alpha: m.alpha,
                        step: m.step,
                        config_digest: m.config_digest,
                        config_text: m.config,
                        frames: m.frames.map(|fs| {
                            fs.into_iter()
                                .map(|f| FrameInfo {
                                    start: f.start,
                                    len: f.len,
                                    epsilon: f.epsilon,
                                    v: f.v,
                                    alpha: f.alpha,
                                })
                                .collect()
                        }),
                    });
                }
                "slot" => {
                    let s: SlotLine = serde_json::from_str(&line).map_err(|e| {
                        HarnessError::Config(format!("trace line {}: {e}", lineno + 1))
                    })?;
                    records.push(SlotRecord {
                        slot: s.t,
                        decision: s.x,
                        objective_value: s.f,
                        constraint_values: s.g,
                        queues: s.q,
                        queues_next: s.q_next,
                        drift: s.drift,
                        step_sq: s.dx2,
                    });
                }
                other => {
                    return Err(HarnessError::Config(format!(
                        "trace line {}: unknown kind {other}",
                        lineno + 1
                    )))
                }
            }
        }
        let meta = meta.ok_or_else(|| HarnessError::Config("trace: missing meta line".into()))?;
        if records.len() as u64 != meta.horizon {
            return Err(HarnessError::Config(format!(
                "trace: {} records but horizon {}",
                records.len(),
                meta.horizon
            )));
        }
        for r in &records {
            if r.decision.len() != meta.dimension
                || r.constraint_values.len() != meta.num_constraints
                || r.queues.len() != meta.num_constraints
                || r.queues_next.len() != meta.num_constraints
            {
                return Err(HarnessError::Config(format!(
                    "trace: slot {} has vector lengths inconsistent with the metadata",
                    r.slot
                )));
            }
        }
        Ok(RunTrace::new(meta, records))
    }

    pub fn load(path: &std::path::Path) -> Result<RunTrace> {
        let file = std::fs::File::open(path).map_err(|source| HarnessError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::read(std::io::BufReader::new(file))
    }
}

fn prefix_sums(records: &[SlotRecord], k: usize) -> (Vec<f64>, Vec<Vec<f64>>, Vec<f64>) {
    let mut obj = Vec::with_capacity(records.len());
    let mut con = vec![Vec::with_capacity(records.len()); k];
    let mut step = Vec::with_capacity(records.len());
    let mut obj_acc = 0.0;
    let mut con_acc = vec![0.0; k];
    let mut step_acc = 0.0;
    for r in records {
        obj_acc += r.objective_value;
        step_acc += r.step_sq;
        obj.push(obj_acc);
        step.push(step_acc);
        for (acc, (out, v)) in con_acc
            .iter_mut()
            .zip(con.iter_mut().zip(&r.constraint_values))
        {
            *acc += v;
            out.push(*acc);
        }
    }
    (obj, con, step)
}

#[derive(Deserialize)]
struct KindLine {
    kind: String,
}

#[derive(Deserialize)]
struct MetaLine {
    #[allow(dead_code)]
    kind: String,
    variant: String,
    seed: u64,
    horizon: u64,
    dim: usize,
    constraints: usize,
    v: Option<f64>,
    alpha: Option<f64>,
    step: Option<f64>,
    config_digest: String,
    config: String,
    frames: Option<Vec<FrameLine>>,
}

#[derive(Deserialize)]
struct FrameLine {
    start: u64,
    len: u64,
    epsilon: f64,
    v: f64,
    alpha: f64,
}

#[derive(Deserialize)]
struct SlotLine {
    #[allow(dead_code)]
    kind: String,
    t: u64,
    x: Vec<f64>,
    f: f64,
    g: Vec<f64>,
    q: Vec<f64>,
    q_next: Vec<f64>,
    drift: f64,
    dx2: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digit_rendering_round_trips() {
        for x in [
            0.1,
            -0.0,
            1.0 / 3.0,
            std::f64::consts::PI,
            6.02214076e23,
            5e-324,
            f64::MAX,
            1.2345678901234567e-300,
        ] {
            let s = fmt_f64(x);
            let back: f64 = s.parse().unwrap();
            assert_eq!(back.to_bits(), x.to_bits(), "{x} -> {s} -> {back}");
        }
    }

    fn tiny_trace() -> RunTrace {
        let meta = TraceMeta {
            variant: SolverVariant::Dpp,
            seed: 3,
            horizon: 2,
            dimension: 1,
            num_constraints: 1,
            v: Some(1.0),
            alpha: Some(1.0),
            step: None,
            config_digest: digest("x"),
            config_text: "seed = 3 # \"quoted\"\n".to_string(),
            frames: None,
        };
        let records = vec![
            SlotRecord {
                slot: 0,
                decision: vec![0.0],
                objective_value: 0.25,
                constraint_values: vec![0.5],
                queues: vec![0.0],
                queues_next: vec![0.0],
                drift: 0.0,
                step_sq: 0.0,
            },
            SlotRecord {
                slot: 1,
                decision: vec![0.125],
                objective_value: 1.0 / 3.0,
                constraint_values: vec![-0.125],
                queues: vec![0.0],
                queues_next: vec![0.5],
                drift: 0.125,
                step_sq: 0.015625,
            },
        ];
        RunTrace::new(meta, records)
    }

    #[test]
    fn write_read_write_is_byte_identical() {
        let trace = tiny_trace();
        let mut first = Vec::new();
        trace.write(&mut first).unwrap();
        let reloaded = RunTrace::read(std::io::Cursor::new(&first)).unwrap();
        assert_eq!(reloaded.records, trace.records);
        assert_eq!(reloaded.meta, trace.meta);
        let mut second = Vec::new();
        reloaded.write(&mut second).unwrap();
        assert_eq!(first, second);
    }

    #[test]
    fn prefix_sums_match_recomputation() {
        let trace = tiny_trace();
        assert!(trace.prefix_sums_consistent());
        assert_eq!(trace.objective_sum(2), 0.25 + 1.0 / 3.0);
        assert_eq!(trace.constraint_sum(0, 1), 0.5);
        assert_eq!(trace.step_sq_sum(2), 0.015625);
    }

    #[test]
    fn record_count_must_match_horizon() {
        let trace = tiny_trace();
        let mut buf = Vec::new();
        trace.write(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let truncated: String = text.lines().take(2).map(|l| format!("{l}\n")).collect();
        assert!(RunTrace::read(std::io::Cursor::new(truncated.as_bytes())).is_err());
    }

    proptest::proptest! {
        #[test]
        fn arbitrary_records_round_trip_byte_identically(
            seed in proptest::prelude::any::<u64>(),
            x0 in -1e12f64..1e12,
            x1 in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO,
            fval in proptest::num::f64::NORMAL,
            q in 0.0f64..1e9,
            drift in -1e9f64..1e9,
        ) {
            let meta = TraceMeta {
                variant: SolverVariant::Dpp,
                seed,
                horizon: 1,
                dimension: 2,
                num_constraints: 1,
                v: Some(3.0),
                alpha: Some(9.0),
                step: None,
                config_digest: digest("p"),
                config_text: String::from("x"),
                frames: None,
            };
            let records = vec![SlotRecord {
                slot: 0,
                decision: vec![x0, x1],
                objective_value: fval,
                constraint_values: vec![drift],
                queues: vec![q],
                queues_next: vec![q],
                drift,
                step_sq: 0.0,
            }];
            let trace = RunTrace::new(meta, records);
            let mut first = Vec::new();
            trace.write(&mut first).unwrap();
            let back = RunTrace::read(std::io::Cursor::new(&first)).unwrap();
            for (a, b) in back.records[0].decision.iter().zip(&trace.records[0].decision) {
                proptest::prop_assert_eq!(a.to_bits(), b.to_bits());
            }
            let mut second = Vec::new();
            back.write(&mut second).unwrap();
            proptest::prop_assert_eq!(first, second);
        }
    }
}
