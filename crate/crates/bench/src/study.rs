//! Convergence, pollution and approximation studies and their CSV form.

use std::io::Write;

use gopw::basis::approximation_oracle;
use gopw::mesh::square_element;
use gopw::{BasisCase, Complex64, GopwBasisSet};

use crate::experiments::{example2_phases, ExampleKind, Experiment};
use crate::pipeline::{run, RunConfig, RunResult};

pub const CSV_HEADER: [&str; 11] = [
    "omega",
    "h",
    "p",
    "q",
    "m",
    "case",
    "dofs",
    "err",
    "order",
    "delta",
    "wall_time_s",
];

#[derive(Debug, Clone, PartialEq)]
pub struct StudyRow {
    pub omega: f64,
    pub h: f64,
    pub p: usize,
    pub q: usize,
    pub m: usize,
    pub case: BasisCase,
    pub dofs: usize,
    /// `None` when the row failed.
    pub err: Option<f64>,
    pub order: Option<f64>,
    pub delta: Option<f64>,
    pub wall_time_s: Option<f64>,
    pub failure: Option<String>,
}

impl StudyRow {
    fn from_result(r: RunResult) -> Self {
        Self {
            omega: r.omega,
            h: r.h,
            p: r.p,
            q: r.q,
            m: r.m,
            case: r.case,
            dofs: r.dofs,
            err: Some(r.err),
            order: None,
            delta: None,
            wall_time_s: Some(r.wall_time_s),
            failure: None,
        }
    }

    fn failed(cfg: &RunConfig, msg: String) -> Self {
        Self {
            omega: cfg.omega,
            h: cfg.h(),
            p: cfg.p,
            q: cfg.q.unwrap_or(0),
            m: cfg.m,
            case: cfg.case,
            dofs: 0,
            err: None,
            order: None,
            delta: None,
            wall_time_s: None,
            failure: Some(msg),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct StudyResult {
    pub rows: Vec<StudyRow>,
}

/// `log(a_err / b_err) / log(a_x / b_x)`.
pub fn log_ratio(a_err: f64, b_err: f64, a_x: f64, b_x: f64) -> f64 {
    (a_err / b_err).ln() / (a_x / b_x).ln()
}

/// Observed h-order between consecutive rows.
pub fn h_order(prev: &StudyRow, row: &StudyRow) -> Option<f64> {
    Some(log_ratio(prev.err?, row.err?, prev.h, row.h))
}

/// Pollution index between consecutive rows.
pub fn pollution_delta(prev: &StudyRow, row: &StudyRow) -> Option<f64> {
    Some(log_ratio(row.err?, prev.err?, row.omega, prev.omega))
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn fitted_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

impl StudyResult {
    /// Fitted order of `err` against `h` over all successful rows.
    pub fn fitted_h_order(&self) -> Option<f64> {
        let (h, e): (Vec<f64>, Vec<f64>) = self.rows.iter().filter_map(|r| Some((r.h, r.err?))).unzip();
        (h.len() >= 2).then(|| fitted_slope(&h, &e))
    }

    pub fn write_csv<W: Write>(&self, out: W, timing: bool) -> csv::Result<()> {
        let mut w = CsvSink::new(out, timing)?;
        for row in &self.rows {
            w.write(row)?;
        }
        w.flush()
    }
}

/// `1.23457e-4` style: six significant digits, scientific.
pub fn fmt_sci(v: f64) -> String {
    format!("{v:.5e}")
}

/// Streaming CSV writer with the fixed column set.
pub struct CsvSink<W: Write> {
    inner: csv::Writer<W>,
    timing: bool,
}

impl<W: Write> CsvSink<W> {
    pub fn new(out: W, timing: bool) -> csv::Result<Self> {
        let mut inner = csv::Writer::from_writer(out);
        inner.write_record(CSV_HEADER)?;
        Ok(Self { inner, timing })
    }

    pub fn write(&mut self, row: &StudyRow) -> csv::Result<()> {
        let opt = |v: Option<f64>| v.map(fmt_sci).unwrap_or_default();
        self.inner.write_record([
            fmt_sci(row.omega),
            fmt_sci(row.h),
            row.p.to_string(),
            row.q.to_string(),
            row.m.to_string(),
            row.case.index().to_string(),
            row.dofs.to_string(),
            opt(row.err),
            opt(row.order),
            opt(row.delta),
            if self.timing { opt(row.wall_time_s) } else { String::new() },
        ])?;
        self.inner.flush()?;
        Ok(())
    }

    pub fn flush(&mut self) -> csv::Result<()> {
        self.inner.flush()?;
        Ok(())
    }
}

fn run_rows(
    configs: &[RunConfig],
    link: fn(&StudyRow, &StudyRow) -> Option<f64>,
    set: fn(&mut StudyRow, Option<f64>),
    mut sink: impl FnMut(&StudyRow),
) -> StudyResult {
    let mut rows: Vec<StudyRow> = Vec::with_capacity(configs.len());
    for cfg in configs {
        let mut row = match run(cfg) {
            Ok(r) => StudyRow::from_result(r),
            Err(e) => StudyRow::failed(cfg, format!("{e:#}")),
        };
        if let Some(prev) = rows.last() {
            let v = link(prev, &row);
            set(&mut row, v);
        }
        sink(&row);
        rows.push(row);
    }
    StudyResult { rows }
}

/// One row per `nx`, at fixed `omega`.
pub fn run_h_study(base: &RunConfig, nxs: &[usize], sink: impl FnMut(&StudyRow)) -> StudyResult {
    let configs: Vec<RunConfig> = nxs.iter().map(|&nx| RunConfig { nx, ..base.clone() }).collect();
    run_rows(&configs, h_order, |r, v| r.order = v, sink)
}

/// One row per `omega`, with `nx = round(omega / omega_h)`.
pub fn run_pollution_study(
    base: &RunConfig,
    omegas: &[f64],
    omega_h: f64,
    sink: impl FnMut(&StudyRow),
) -> StudyResult {
    let configs: Vec<RunConfig> = omegas
        .iter()
        .map(|&omega| RunConfig {
            omega,
            nx: (omega / omega_h).round().max(1.0) as usize,
            ..base.clone()
        })
        .collect();
    run_rows(&configs, pollution_delta, |r, v| r.delta = v, sink)
}

/// Target functions available to the approximation study.
pub fn oracle_target(kind: ExampleKind, omega: f64) -> Box<dyn Fn([f64; 2]) -> Complex64 + Sync> {
    match kind {
        ExampleKind::Example2 => Box::new(move |r| {
            let (p1, _) = example2_phases(r).expect("phase defined on the unit square");
            Complex64::new(0.0, omega * p1).exp()
        }),
        _ => {
            let e = Experiment::new(kind, omega, Default::default());
            Box::new(move |r| e.u(r))
        }
    }
}

/// Centre of the single element used by the approximation study.
pub const ORACLE_CENTER: [f64; 2] = [0.5, 0.5];

/// Best-fit error of the single-wave target by one local space, with `h = omega_h / omega`.
///
/// `err` is the sampled maximum error relative to the sampled maximum of the target.
pub fn run_oracle_study(
    base: &RunConfig,
    omegas: &[f64],
    omega_h: f64,
    q: usize,
    mut sink: impl FnMut(&StudyRow),
) -> StudyResult {
    let mut rows: Vec<StudyRow> = Vec::new();
    for &omega in omegas {
        let h = omega_h / omega;
        let el = square_element(ORACLE_CENTER, h);
        let exp = Experiment::new(base.example, omega, base.impedance);
        let mut row = StudyRow {
            omega,
            h,
            p: base.p,
            q,
            m: base.m,
            case: base.case,
            dofs: 0,
            err: None,
            order: None,
            delta: None,
            wall_time_s: None,
            failure: None,
        };
        let start = std::time::Instant::now();
        match GopwBasisSet::build(exp.field().as_ref(), &el, base.p, q, base.case, omega) {
            Ok(space) => {
                let target = oracle_target(base.example, omega);
                let res = approximation_oracle(&space, &el, target, None);
                row.dofs = space.dim();
                row.err = Some(res.linf_error / res.linf_norm);
            }
            Err(e) => row.failure = Some(e.to_string()),
        }
        row.wall_time_s = Some(start.elapsed().as_secs_f64());
        if let Some(prev) = rows.last() {
            row.order = h_order(prev, &row);
        }
        sink(&row);
        rows.push(row);
    }
    StudyResult { rows }
}
