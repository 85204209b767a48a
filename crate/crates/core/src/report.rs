//! Command implementations and their reports.
//!
//! Every report carries a header echoing the tolerances in force. Reports
//! serialize to JSON (exact float round-trip) or to CSV tables. A CSV export
//! starts with `#`-prefixed header lines, then one block per table, each
//! introduced by a `# table: <name>` line. Column orders are fixed by the
//! `*_COLUMNS` constants.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chain::{ChainError, Configuration, CRITICAL_GATE, HESSIAN_FD_STEP};
use crate::critical::{
    classify, eulerian_bound, eulerian_triangle, euler_alt_sum, find_critical, flat_index, polish, Classification,
    CriticalError, CriticalRecord, Crossing, SearchConfig, StartPlan, Tolerances,
};
use crate::io::{ChainFile, FileError, ADJUSTMENT_WARNING};
use crate::panel::{apply, flat_configurations, fold_points, orbit, FoldReport, Involution, PanelError, PANEL_TOL};
use crate::reach::{grid_max, reach, ArcOptions, Certification, FoldChoice, ReachError, ON_HINGE_TOL};

pub const REPORT_TAG: &str = "hingechain-report/1";
/// Largest grid evaluated by the verification mode of `reach`.
pub const MAX_VERIFY_GRID: u128 = 1 << 26;

#[derive(Debug, Error)]
pub enum CommandError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Convergence(String),
}

impl CommandError {
    /// Process exit status: 2 for invalid input, 3 for solver failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CommandError::Input(_) => 2,
            CommandError::Convergence(_) => 3,
        }
    }
}

impl From<FileError> for CommandError {
    fn from(e: FileError) -> Self {
        CommandError::Input(e.to_string())
    }
}

impl From<ChainError> for CommandError {
    fn from(e: ChainError) -> Self {
        CommandError::Input(e.to_string())
    }
}

impl From<CriticalError> for CommandError {
    fn from(e: CriticalError) -> Self {
        CommandError::Input(e.to_string())
    }
}

impl From<PanelError> for CommandError {
    fn from(e: PanelError) -> Self {
        CommandError::Input(e.to_string())
    }
}

impl From<ReachError> for CommandError {
    fn from(e: ReachError) -> Self {
        match e {
            ReachError::NoConvergence { .. } => CommandError::Convergence(e.to_string()),
            other => CommandError::Input(other.to_string()),
        }
    }
}

/// Tolerances and step sizes in force for a command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Header {
    pub format: String,
    pub command: String,
    pub tolerances: Tolerances,
    pub arc: ArcOptions,
    pub critical_gate: f64,
    pub hessian_fd_step: f64,
    pub panel_tol: f64,
    pub on_hinge_tol: f64,
    pub adjustment_warning: f64,
}

impl Header {
    fn new(command: &str, tolerances: Tolerances, arc: ArcOptions) -> Self {
        Self {
            format: REPORT_TAG.to_string(),
            command: command.to_string(),
            tolerances,
            arc,
            critical_gate: CRITICAL_GATE,
            hessian_fd_step: HESSIAN_FD_STEP,
            panel_tol: PANEL_TOL,
            on_hinge_tol: ON_HINGE_TOL,
            adjustment_warning: ADJUSTMENT_WARNING,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub header: Header,
    pub warnings: Vec<String>,
    pub body: Body,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Body {
    Fk(FkBody),
    Reach(ReachBody),
    Critical(CriticalBody),
    Classify(ClassifyBody),
    PanelFlat(PanelFlatBody),
    PanelOrbit(PanelOrbitBody),
    PanelInvolution(PanelInvolutionBody),
    Bound(BoundBody),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HingePose {
    pub label: String,
    pub point: Vec<f64>,
    pub directions: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FkBody {
    pub theta: Configuration,
    pub end_point: Vec<f64>,
    pub value: f64,
    pub distance: f64,
    pub hinges: Vec<HingePose>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridCheck {
    pub resolution: usize,
    pub max_distance: f64,
    pub theta: Configuration,
    /// `(L - grid max) / scale`; never negative beyond rounding.
    pub excess: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReachBody {
    pub max_distance: f64,
    pub achieved_distance: f64,
    pub gap: f64,
    pub theta_star: Configuration,
    pub witness: Vec<Vec<f64>>,
    pub ordering_params: Vec<f64>,
    pub certified: bool,
    pub certification: Certification,
    pub folds: Vec<FoldChoice>,
    pub grid: Option<GridCheck>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalRow {
    pub theta: Configuration,
    pub value: f64,
    pub grad_norm: f64,
    pub index: Option<usize>,
    pub class: Classification,
    pub params_a: Vec<Crossing>,
    pub max_residual: f64,
    pub eigenvalues: Vec<f64>,
}

impl CriticalRow {
    fn new(record: &CriticalRecord, tol: &Tolerances) -> Self {
        Self {
            theta: record.theta.clone(),
            value: record.value,
            grad_norm: record.grad_norm,
            index: record.index,
            class: classify(record, tol),
            params_a: record.params_a.clone(),
            max_residual: record.max_residual(),
            eigenvalues: record.eigenvalues.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalBody {
    pub plan: StartPlan,
    pub seed: u64,
    pub starts_used: usize,
    pub rows: Vec<CriticalRow>,
    pub counts_by_index: Vec<usize>,
    pub isolated: usize,
    pub zero_fiber: usize,
    pub bound: String,
    pub within_bound: bool,
    pub alternating_sum: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifyBody {
    pub input: Configuration,
    pub polished: bool,
    pub critical: bool,
    pub row: CriticalRow,
    pub certification: Certification,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlatRow {
    pub theta: Configuration,
    pub value: f64,
    pub grad_norm: f64,
    /// Index from the crossing parameters; absent when degenerate.
    pub flat_index: Option<usize>,
    /// Negative eigenvalue count of the Hessian; absent on the zero fiber.
    pub hessian_index: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PanelFlatBody {
    pub rows: Vec<FlatRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitRow {
    pub theta: Configuration,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PanelOrbitBody {
    pub theta: Configuration,
    pub members: Vec<OrbitRow>,
    pub spread: f64,
    /// Present when `theta` is critical with `F > 0`.
    pub folds: Option<FoldReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PanelInvolutionBody {
    pub theta: Configuration,
    pub involution: Involution,
    pub image: Configuration,
    pub value_before: f64,
    pub value_after: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundBody {
    pub n: usize,
    pub d: usize,
    pub eulerian: Vec<String>,
    pub bound: String,
}

fn coords(v: &nalgebra::DVector<f64>) -> Vec<f64> {
    v.iter().copied().collect()
}

fn check_theta(file: &ChainFile, theta: &Configuration) -> Result<(), CommandError> {
    if theta.len() != file.chain.n() {
        return Err(ChainError::WrongLength { expected: file.chain.n(), found: theta.len() }.into());
    }
    Ok(())
}

/// End-point, distance and current hinge poses at `theta`.
pub fn cmd_fk(file: &ChainFile, theta: &Configuration) -> Result<Report, CommandError> {
    check_theta(file, theta)?;
    let chain = &file.chain;
    let e = chain.end_point(theta);
    let hinges = chain
        .placements(theta)
        .iter()
        .enumerate()
        .map(|(i, h)| HingePose {
            label: file.label(i),
            point: coords(h.base()),
            directions: h.flat().directions().iter().map(coords).collect(),
        })
        .collect();
    let value = e.norm_squared();
    Ok(Report {
        header: Header::new("fk", Tolerances::default(), ArcOptions::default()),
        warnings: file.warnings.clone(),
        body: Body::Fk(FkBody { theta: theta.clone(), end_point: coords(&e), value, distance: value.sqrt(), hinges }),
    })
}

/// Certified maximum reach; `grid` adds a brute-force comparison.
pub fn cmd_reach(
    file: &ChainFile,
    arc: &ArcOptions,
    tol: &Tolerances,
    grid: Option<usize>,
) -> Result<Report, CommandError> {
    let chain = &file.chain;
    let r = reach(chain, arc, tol)?;
    let achieved = chain.squared_distance(&r.theta_star).sqrt();
    let grid = match grid {
        None => None,
        Some(resolution) => {
            let (best, theta) = grid_max(chain, resolution, MAX_VERIFY_GRID)
                .ok_or_else(|| CommandError::Input(format!("grid {resolution}^{} is too large", chain.n())))?;
            let max_distance = best.sqrt();
            Some(GridCheck { resolution, max_distance, theta, excess: (r.max_distance - max_distance) / chain.scale() })
        }
    };
    Ok(Report {
        header: Header::new("reach", *tol, *arc),
        warnings: file.warnings.clone(),
        body: Body::Reach(ReachBody {
            max_distance: r.max_distance,
            achieved_distance: achieved,
            gap: r.gap,
            theta_star: r.theta_star,
            witness: r.witness.points.iter().map(coords).collect(),
            ordering_params: r.ordering_params,
            certified: r.certification.is_certified(),
            certification: r.certification,
            folds: r.folds,
            grid,
        }),
    })
}

/// Census of critical configurations with the count bound and alternating sum.
pub fn cmd_critical(file: &ChainFile, cfg: &SearchConfig) -> Result<Report, CommandError> {
    let census = find_critical(&file.chain, cfg)?;
    let rows = census.records.iter().map(|r| CriticalRow::new(r, &cfg.tol)).collect();
    Ok(Report {
        header: Header::new("critical", cfg.tol, ArcOptions::default()),
        warnings: file.warnings.clone(),
        body: Body::Critical(CriticalBody {
            plan: cfg.starts,
            seed: cfg.seed,
            starts_used: census.starts_used,
            rows,
            counts_by_index: census.counts_by_index.clone(),
            isolated: census.isolated_count(),
            zero_fiber: census.zero_fiber().count(),
            bound: census.bound.to_string(),
            within_bound: census.within_bound(),
            alternating_sum: euler_alt_sum(&census),
        }),
    })
}

/// Classifies `theta`, optionally polishing it to a nearby critical point first.
pub fn cmd_classify(
    file: &ChainFile,
    theta: &Configuration,
    cfg: &SearchConfig,
    polish_first: bool,
) -> Result<Report, CommandError> {
    check_theta(file, theta)?;
    let chain = &file.chain;
    let at = if polish_first {
        polish(chain, theta, cfg)
            .ok_or_else(|| CommandError::Convergence("no critical point reached from the given angles".into()))?
    } else {
        theta.clone()
    };
    let record = CriticalRecord::at(chain, at.clone(), &cfg.tol);
    let critical = record.grad_norm <= CRITICAL_GATE * chain.scale() * chain.scale();
    let certification = crate::reach::certify_global_max(chain, &at, &cfg.tol);
    Ok(Report {
        header: Header::new("classify", cfg.tol, ArcOptions::default()),
        warnings: file.warnings.clone(),
        body: Body::Classify(ClassifyBody {
            input: theta.clone(),
            polished: polish_first,
            critical,
            row: CriticalRow::new(&record, &cfg.tol),
            certification,
        }),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum PanelCommand {
    Flat,
    Orbit(Configuration),
    Involution(Configuration, Involution),
}

pub fn cmd_panel(file: &ChainFile, command: &PanelCommand, tol: &Tolerances) -> Result<Report, CommandError> {
    let panel = file.panel()?;
    let chain = panel.chain();
    let (name, body) = match command {
        PanelCommand::Flat => {
            let rows = flat_configurations(panel)?
                .into_iter()
                .map(|theta| {
                    let record = CriticalRecord::at(chain, theta.clone(), tol);
                    let flat = crate::critical::intersection_params(chain, &theta, tol)
                        .ok()
                        .and_then(|a| flat_index(&a.iter().map(Crossing::value).collect::<Vec<_>>()).ok());
                    FlatRow {
                        value: record.value,
                        grad_norm: record.grad_norm,
                        flat_index: flat,
                        hessian_index: record.index,
                        theta,
                    }
                })
                .collect();
            ("panel flat", Body::PanelFlat(PanelFlatBody { rows }))
        }
        PanelCommand::Orbit(theta) => {
            check_theta(file, theta)?;
            let members: Vec<OrbitRow> = orbit(panel, theta, tol.dedup)?
                .into_iter()
                .map(|t| OrbitRow { value: chain.squared_distance(&t), theta: t })
                .collect();
            let (lo, hi) = members
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), m| (lo.min(m.value), hi.max(m.value)));
            let folds = fold_points(panel, theta, tol).ok();
            (
                "panel orbit",
                Body::PanelOrbit(PanelOrbitBody { theta: theta.clone(), members, spread: hi - lo, folds }),
            )
        }
        PanelCommand::Involution(theta, op) => {
            check_theta(file, theta)?;
            let image = apply(panel, theta, *op)?;
            (
                "panel involution",
                Body::PanelInvolution(PanelInvolutionBody {
                    value_before: chain.squared_distance(theta),
                    value_after: chain.squared_distance(&image),
                    theta: theta.clone(),
                    involution: *op,
                    image,
                }),
            )
        }
    };
    Ok(Report { header: Header::new(name, *tol, ArcOptions::default()), warnings: file.warnings.clone(), body })
}

/// Eulerian numbers of row `n` and the critical-point bound in dimension `d`.
pub fn cmd_bound(n: usize, d: usize) -> Report {
    let row = eulerian_triangle(n).pop().unwrap_or_default();
    Report {
        header: Header::new("bound", Tolerances::default(), ArcOptions::default()),
        warnings: Vec::new(),
        body: Body::Bound(BoundBody {
            n,
            d,
            eulerian: row.iter().map(|a| a.to_string()).collect(),
            bound: eulerian_bound(n, d).to_string(),
        }),
    }
}

pub const FK_COLUMNS: [&str; 4] = ["hinge", "label", "point", "directions"];
pub const REACH_COLUMNS: [&str; 3] = ["hinge", "witness", "ordering_param"];
pub const CRITICAL_COLUMNS: [&str; 8] =
    ["theta", "value", "grad_norm", "index", "class", "params_a", "max_residual", "eigenvalues"];
pub const FLAT_COLUMNS: [&str; 5] = ["theta", "value", "grad_norm", "flat_index", "hessian_index"];
pub const ORBIT_COLUMNS: [&str; 2] = ["theta", "value"];
pub const SUMMARY_COLUMNS: [&str; 2] = ["key", "value"];

fn join(values: &[f64]) -> String {
    values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" ")
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn class_name(c: &Classification) -> String {
    match c {
        Classification::GlobalMaxCertified => "global_max_certified".into(),
        Classification::MinCandidate => "min_candidate".into(),
        Classification::Saddle { index } => format!("saddle({index})"),
        Classification::ZeroFiber => "zero_fiber".into(),
    }
}

fn crossings(c: &[Crossing]) -> String {
    c.iter()
        .map(|x| match x {
            Crossing::At(a) => a.to_string(),
            Crossing::Parallel => "parallel".into(),
        })
        .collect::<Vec<_>>()
        .join(" ")
}

fn certification_name(c: &Certification) -> String {
    match c {
        Certification::Certified { .. } => "certified".into(),
        Certification::Rejected(r) => format!("rejected: {}", serde_json::to_string(r).unwrap_or_default()),
    }
}

struct Table {
    name: &'static str,
    columns: &'static [&'static str],
    rows: Vec<Vec<String>>,
}

fn summary(pairs: Vec<(&str, String)>) -> Table {
    Table {
        name: "summary",
        columns: &SUMMARY_COLUMNS,
        rows: pairs.into_iter().map(|(k, v)| vec![k.to_string(), v]).collect(),
    }
}

fn critical_row(r: &CriticalRow) -> Vec<String> {
    vec![
        join(r.theta.angles()),
        r.value.to_string(),
        r.grad_norm.to_string(),
        opt(r.index),
        class_name(&r.class),
        crossings(&r.params_a),
        r.max_residual.to_string(),
        join(&r.eigenvalues),
    ]
}

impl Report {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    fn tables(&self) -> Vec<Table> {
        match &self.body {
            Body::Fk(b) => vec![
                summary(vec![
                    ("theta", join(b.theta.angles())),
                    ("end_point", join(&b.end_point)),
                    ("value", b.value.to_string()),
                    ("distance", b.distance.to_string()),
                ]),
                Table {
                    name: "hinges",
                    columns: &FK_COLUMNS,
                    rows: b
                        .hinges
                        .iter()
                        .enumerate()
                        .map(|(i, h)| {
                            let dirs: Vec<String> = h.directions.iter().map(|d| join(d)).collect();
                            vec![(i + 1).to_string(), h.label.clone(), join(&h.point), dirs.join(" | ")]
                        })
                        .collect(),
                },
            ],
            Body::Reach(b) => {
                let mut pairs = vec![
                    ("max_distance", b.max_distance.to_string()),
                    ("achieved_distance", b.achieved_distance.to_string()),
                    ("gap", b.gap.to_string()),
                    ("theta_star", join(b.theta_star.angles())),
                    ("certification", certification_name(&b.certification)),
                    ("folds", b.folds.len().to_string()),
                ];
                if let Some(g) = &b.grid {
                    pairs.push(("grid_resolution", g.resolution.to_string()));
                    pairs.push(("grid_max_distance", g.max_distance.to_string()));
                    pairs.push(("grid_excess", g.excess.to_string()));
                }
                vec![
                    summary(pairs),
                    Table {
                        name: "witness",
                        columns: &REACH_COLUMNS,
                        rows: b
                            .witness
                            .iter()
                            .zip(&b.ordering_params)
                            .enumerate()
                            .map(|(i, (w, s))| vec![(i + 1).to_string(), join(w), s.to_string()])
                            .collect(),
                    },
                ]
            }
            Body::Critical(b) => vec![
                Table { name: "census", columns: &CRITICAL_COLUMNS, rows: b.rows.iter().map(critical_row).collect() },
                summary(vec![
                    ("plan", serde_json::to_string(&b.plan).unwrap_or_default()),
                    ("seed", b.seed.to_string()),
                    ("starts_used", b.starts_used.to_string()),
                    (
                        "counts_by_index",
                        b.counts_by_index.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(" "),
                    ),
                    ("isolated", b.isolated.to_string()),
                    ("zero_fiber", b.zero_fiber.to_string()),
                    ("bound", b.bound.clone()),
                    ("within_bound", b.within_bound.to_string()),
                    ("alternating_sum", b.alternating_sum.to_string()),
                ]),
            ],
            Body::Classify(b) => vec![
                Table { name: "record", columns: &CRITICAL_COLUMNS, rows: vec![critical_row(&b.row)] },
                summary(vec![
                    ("input", join(b.input.angles())),
                    ("polished", b.polished.to_string()),
                    ("critical", b.critical.to_string()),
                    ("certification", certification_name(&b.certification)),
                ]),
            ],
            Body::PanelFlat(b) => vec![Table {
                name: "flat",
                columns: &FLAT_COLUMNS,
                rows: b
                    .rows
                    .iter()
                    .map(|r| {
                        vec![
                            join(r.theta.angles()),
                            r.value.to_string(),
                            r.grad_norm.to_string(),
                            opt(r.flat_index),
                            opt(r.hessian_index),
                        ]
                    })
                    .collect(),
            }],
            Body::PanelOrbit(b) => {
                let mut pairs = vec![
                    ("theta", join(b.theta.angles())),
                    ("size", b.members.len().to_string()),
                    ("spread", b.spread.to_string()),
                ];
                if let Some(f) = &b.folds {
                    pairs.push(("folds", f.count.to_string()));
                    pairs.push(("hyperplanes", f.hyperplanes.to_string()));
                }
                vec![
                    summary(pairs),
                    Table {
                        name: "orbit",
                        columns: &ORBIT_COLUMNS,
                        rows: b.members.iter().map(|m| vec![join(m.theta.angles()), m.value.to_string()]).collect(),
                    },
                ]
            }
            Body::PanelInvolution(b) => vec![summary(vec![
                ("theta", join(b.theta.angles())),
                ("involution", serde_json::to_string(&b.involution).unwrap_or_default()),
                ("image", join(b.image.angles())),
                ("value_before", b.value_before.to_string()),
                ("value_after", b.value_after.to_string()),
            ])],
            Body::Bound(b) => vec![summary(vec![
                ("n", b.n.to_string()),
                ("d", b.d.to_string()),
                ("eulerian", b.eulerian.join(" ")),
                ("bound", b.bound.clone()),
            ])],
        }
    }

    /// CSV export: header comment lines, then one block per table.
    pub fn to_table(&self) -> String {
        let h = &self.header;
        let t = &h.tolerances;
        let mut out = format!("# {} {}\n", h.format, h.command);
        out.push_str(&format!(
            "# tol grad={} zero_value={} incidence={} ordering={} dedup={}\n",
            t.grad, t.zero_value, t.incidence, t.ordering, t.dedup
        ));
        out.push_str(&format!(
            "# arc sweep_tol={} max_sweeps={} refine={} critical_gate={} hessian_fd_step={} panel_tol={} on_hinge_tol={}\n",
            h.arc.sweep_tol, h.arc.max_sweeps, h.arc.refine, h.critical_gate, h.hessian_fd_step, h.panel_tol, h.on_hinge_tol
        ));
        for w in &self.warnings {
            out.push_str(&format!("# warning: {w}\n"));
        }
        for table in self.tables() {
            out.push_str(&format!("# table: {}\n", table.name));
            let mut wtr = csv::Writer::from_writer(Vec::new());
            wtr.write_record(table.columns).expect("in-memory write");
            for row in &table.rows {
                wtr.write_record(row).expect("in-memory write");
            }
            out.push_str(&String::from_utf8(wtr.into_inner().expect("flush")).expect("utf-8"));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::parse_chain_file;
    use std::f64::consts::PI;

    const PLANAR: &str = r#"
format = "hingechain/1"
dimension = 2
endpoint = [3.0, 0.0]
[[hinge]]
point = [1.0, 0.0]
[[hinge]]
point = [2.0, 0.0]
"#;

    #[test]
    fn fk_report_values() {
        let f = parse_chain_file(PLANAR).unwrap();
        let r = cmd_fk(&f, &Configuration::zeros(2)).unwrap();
        let Body::Fk(b) = &r.body else { panic!() };
        assert_eq!(b.end_point, vec![3.0, 0.0]);
        assert_eq!(b.value, 9.0);
        let r = cmd_fk(&f, &Configuration::new(vec![0.0, PI])).unwrap();
        let Body::Fk(b) = &r.body else { panic!() };
        assert!((b.end_point[0] - 1.0).abs() < 1e-15 && b.end_point[1].abs() < 1e-15);
        assert_eq!(cmd_fk(&f, &Configuration::zeros(3)).unwrap_err().exit_code(), 2);
    }

    #[test]
    fn reach_report_certifies() {
        let f = parse_chain_file(PLANAR).unwrap();
        let r = cmd_reach(&f, &ArcOptions::default(), &Tolerances::default(), Some(64)).unwrap();
        let Body::Reach(b) = &r.body else { panic!() };
        assert!(b.certified);
        assert!((b.max_distance - 3.0).abs() < 1e-14);
        assert!(b.grid.as_ref().unwrap().excess.abs() < 1e-12);
    }

    #[test]
    fn json_round_trips_exactly() {
        let f = parse_chain_file(PLANAR).unwrap();
        let cfg = SearchConfig { starts: StartPlan::Scattered(200), ..SearchConfig::default() };
        for r in [
            cmd_critical(&f, &cfg).unwrap(),
            cmd_reach(&f, &ArcOptions::default(), &Tolerances::default(), None).unwrap(),
            cmd_fk(&f, &Configuration::new(vec![0.1, 2.0])).unwrap(),
            cmd_bound(5, 3),
        ] {
            let back = Report::from_json(&r.to_json()).unwrap();
            assert_eq!(back, r);
        }
    }

    #[test]
    fn critical_table_has_fixed_columns() {
        let f = parse_chain_file(PLANAR).unwrap();
        let cfg = SearchConfig { starts: StartPlan::Scattered(200), ..SearchConfig::default() };
        let text = cmd_critical(&f, &cfg).unwrap().to_table();
        assert!(text.starts_with("# hingechain-report/1 critical\n# tol grad="));
        assert!(text.contains("# table: census\ntheta,value,grad_norm,index,class,params_a,max_residual,eigenvalues\n"));
    }

    #[test]
    fn bound_report() {
        let Body::Bound(b) = cmd_bound(2, 2).body else { panic!() };
        assert_eq!(b.bound, "12");
        assert_eq!(b.eulerian, vec!["1", "1"]);
    }

    #[test]
    fn panel_commands_need_panels() {
        let f = parse_chain_file(PLANAR).unwrap();
        let err = cmd_panel(&f, &PanelCommand::Flat, &Tolerances::default()).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }
}
