//! Command runners producing long-format rows.

use std::path::Path;

use faraday_qns::correlations::correlation;
use faraday_qns::optics::{FockTruncation, MeasurementBasis};
use faraday_qns::snr::snr_material;
use faraday_qns::trajectory::{run_sequences, ClassicalFieldModel, Target, TrajectoryConfig};
use faraday_qns::weak::{gk_exact_unitary, gk_leading, gk_leading_calibrated, ProtocolSpec, ShotSpec};

use crate::config::{self, McMode, RunConfig, SweepCommand};
use crate::error::CliError;

pub const HEADER: [&str; 11] = [
    "point",
    "sweep_parameter",
    "sweep_value",
    "coord",
    "coord_value",
    "coord_unit",
    "label",
    "quantity",
    "value",
    "unit",
    "source",
];

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Row {
    pub point: usize,
    pub sweep_parameter: String,
    pub sweep_value: Option<f64>,
    pub coord: String,
    pub coord_value: Option<f64>,
    pub coord_unit: String,
    pub label: String,
    pub quantity: String,
    pub value: f64,
    pub unit: String,
    pub source: String,
}

fn num(v: f64) -> String {
    format!("{v:e}")
}

impl Row {
    pub fn record(&self) -> [String; 11] {
        [
            self.point.to_string(),
            self.sweep_parameter.clone(),
            self.sweep_value.map(num).unwrap_or_default(),
            self.coord.clone(),
            self.coord_value.map(num).unwrap_or_default(),
            self.coord_unit.clone(),
            self.label.clone(),
            self.quantity.clone(),
            num(self.value),
            self.unit.clone(),
            self.source.clone(),
        ]
    }
}

/// Rows plus non-fatal warnings.
#[derive(Debug, Default)]
pub struct Output {
    pub rows: Vec<Row>,
    pub warnings: Vec<String>,
}

struct Emitter<'a> {
    out: &'a mut Output,
    point: usize,
    coord: (&'a str, Option<f64>, &'a str),
    label: String,
}

impl Emitter<'_> {
    fn push(&mut self, quantity: &str, value: f64, unit: &str, source: &str) {
        self.out.rows.push(Row {
            point: self.point,
            coord: self.coord.0.into(),
            coord_value: self.coord.1,
            coord_unit: self.coord.2.into(),
            label: self.label.clone(),
            quantity: quantity.into(),
            value,
            unit: unit.into(),
            source: source.into(),
            ..Row::default()
        });
    }
}

fn guard_finite(rows: &[Row]) -> Result<(), CliError> {
    match rows.iter().find(|r| r.value.is_nan() || (r.value.is_infinite() && r.quantity != "mc_std_error")) {
        Some(r) => Err(CliError::Numeric(format!("{} evaluated to {}", r.quantity, r.value))),
        None => Ok(()),
    }
}

fn with_last_time(proto: &ProtocolSpec, t: f64) -> Result<ProtocolSpec, CliError> {
    let mut shots = proto.shots().to_vec();
    let last = shots.last_mut().expect("non-empty protocol");
    *last = ShotSpec::new(t, last.basis);
    Ok(ProtocolSpec::new(shots, *proto.sensor())?.with_coupling_time(proto.coupling_time()))
}

fn truncation(cfg: &RunConfig, alpha: f64) -> Result<FockTruncation, CliError> {
    let tr = match cfg.exact.n_max {
        Some(n) => FockTruncation::new(n)?,
        None => FockTruncation::for_alpha(alpha)?,
    };
    tr.check(alpha)?;
    Ok(tr)
}

pub fn exact(cfg: &RunConfig) -> Result<Output, CliError> {
    let model = cfg.require_model()?;
    let base = cfg.require_protocol()?;
    let k = base.order();
    let protocols: Vec<(Option<f64>, ProtocolSpec)> = match &cfg.exact.last_shot_times {
        None => vec![(None, base.clone())],
        Some(ts) if ts.is_empty() => return Err(CliError::Config("exact.last_shot_times is empty".into())),
        Some(ts) => ts.iter().map(|&t| Ok((Some(t), with_last_time(&base, t)?))).collect::<Result<_, CliError>>()?,
    };
    let tr = if cfg.exact.unitary { Some(truncation(cfg, base.sensor().alpha)?) } else { None };
    let (c_unit, g_unit, f_unit) = (format!("(rad/s)^{k}"), format!("counts^{k}"), format!("counts^{k}*(s/rad)^{k}"));
    let mut out = Output { warnings: base.warnings(), ..Output::default() };
    for (point, (t, proto)) in protocols.into_iter().enumerate() {
        let t = t.or(proto.shots().last().map(|s| s.time));
        let mut e = Emitter { out: &mut out, point, coord: ("t_last", t, "s"), label: proto.label() };
        e.push("correlation", correlation(&model, &proto.induced_query())?, &c_unit, "correlations");
        e.push("proportionality_factor", proto.proportionality_factor(), &f_unit, "weak-measurement");
        e.push("gk_leading", gk_leading(&model, &proto)?.value, &g_unit, "weak-measurement/leading");
        e.push("gk_leading_calibrated", gk_leading_calibrated(&model, &proto)?.value, &g_unit, "weak-measurement/calibrated");
        if let Some(tr) = tr {
            e.push("gk_exact_unitary", gk_exact_unitary(&model, &proto, tr)?.value, &g_unit, "weak-measurement/exact-unitary");
        }
    }
    guard_finite(&out.rows)?;
    Ok(out)
}

/// Readout-product mean for a classical field; zero whenever an `S₃` shot occurs.
fn field_prediction(field: &ClassicalFieldModel, proto: &ProtocolSpec) -> f64 {
    if proto.shots().iter().any(|s| s.basis == MeasurementBasis::S3) {
        return 0.0;
    }
    let times: Vec<f64> = proto.shots().iter().map(|s| proto.effective_time(s)).collect();
    field.readout_product_mean(&times, proto.sensor().alpha, proto.sensor().tau)
}

pub fn simulate(cfg: &RunConfig) -> Result<Output, CliError> {
    let mc = cfg.mc.as_ref().ok_or_else(|| CliError::Config("missing [mc]".into()))?;
    let seed = cfg.require_seed()?;
    let proto = cfg.require_protocol()?;
    let k = proto.order();
    let target = match (mc.mode, &mc.field) {
        (McMode::KrausQuantum, None) => Target::Quantum(cfg.require_model()?),
        (McMode::SemiclassicalField, Some(f)) => Target::Field((*f).into()),
        (McMode::KrausQuantum, Some(_)) => return Err(CliError::Config("mc.field is only valid in semiclassical_field mode".into())),
        (McMode::SemiclassicalField, None) => return Err(CliError::Config("semiclassical_field mode needs [mc.field]".into())),
    };
    let tcfg = TrajectoryConfig::new(mc.sequences, seed, proto.clone(), target.clone())?;
    let est = run_sequences(&tcfg)?;
    let mode = tcfg.mode().name();
    let source = format!("trajectory-mc/{mode}");
    let (g_unit, v_unit, v2_unit) = (format!("counts^{k}"), "counts^2".to_string(), format!("counts^{}", 2 * k));
    let mut out = Output { warnings: proto.warnings(), ..Output::default() };
    let mut e = Emitter { out: &mut out, point: 0, coord: ("sequences", Some(mc.sequences as f64), "1"), label: proto.label() };
    e.push("mc_mean", est.mean, &g_unit, &source);
    e.push("mc_std_error", est.std_error, &g_unit, &source);
    e.push("mc_empirical_snr", est.empirical_snr(), "1", &source);
    e.push("mc_per_shot_variance", est.per_shot_variance, &v_unit, &source);
    e.push("mc_raw_per_shot_variance", est.raw_per_shot_variance(), &v_unit, &source);
    e.push("mc_product_variance", est.product_variance, &v2_unit, &source);
    e.push("mc_factorized_variance", est.factorized_variance(), &v2_unit, &source);
    match &target {
        Target::Quantum(model) => {
            e.push("gk_leading", gk_leading(model, &proto)?.value, &g_unit, "weak-measurement/leading");
            let tr = truncation(cfg, proto.sensor().alpha)?;
            e.push("gk_exact_unitary", gk_exact_unitary(model, &proto, tr)?.value, &g_unit, "weak-measurement/exact-unitary");
        }
        Target::Field(field) => {
            e.push("field_prediction", field_prediction(field, &proto), &g_unit, "trajectory-mc/field-moments");
        }
    }
    guard_finite(&out.rows)?;
    Ok(out)
}

pub fn snr(cfg: &RunConfig, base_dir: &Path) -> Result<Output, CliError> {
    let s = cfg.snr.as_ref().ok_or_else(|| CliError::Config("missing [snr]".into()))?;
    if s.orders.is_empty() {
        return Err(CliError::Config("snr.orders is empty".into()));
    }
    let material = s.material(base_dir)?;
    let mut out = Output::default();
    for (point, &k) in s.orders.iter().enumerate() {
        let report = snr_material(&material.scenario(k, s.sequences, s.xi))?;
        let source = format!("snr-feasibility/{}", report.regime.name());
        let mut e = Emitter { out: &mut out, point, coord: ("order", Some(k as f64), "1"), label: material.name.clone() };
        e.push("snr", report.snr, "1", &source);
        e.push("snr_per_sqrt_l", report.snr_per_sqrt_l, "1", &source);
        e.push("l_for_unit_snr", report.l_for_unit_snr, "sequences", &source);
        e.push("base_factor", report.base_factor, "1", &source);
        e.push("prefactor", report.prefactor, "1", &source);
    }
    guard_finite(&out.rows)?;
    Ok(out)
}

pub fn sweep(cfg: &RunConfig, table: &toml::Table, base_dir: &Path) -> Result<Output, CliError> {
    let sw = cfg.sweep.as_ref().ok_or_else(|| CliError::Config("missing [sweep]".into()))?;
    if sw.values.is_empty() {
        return Err(CliError::Config("sweep.values is empty".into()));
    }
    let mut out = Output::default();
    for (i, &v) in sw.values.iter().enumerate() {
        let point_cfg = config::with_parameter(table, &sw.parameter, v)?;
        let inner = match sw.command {
            SweepCommand::Exact => exact(&point_cfg)?,
            SweepCommand::Simulate => simulate(&point_cfg)?,
            SweepCommand::Snr => snr(&point_cfg, base_dir)?,
        };
        for w in inner.warnings {
            if !out.warnings.contains(&w) {
                out.warnings.push(w);
            }
        }
        out.rows.extend(inner.rows.into_iter().map(|r| Row {
            point: i,
            sweep_parameter: sw.parameter.clone(),
            sweep_value: Some(v),
            ..r
        }));
    }
    Ok(out)
}
