//! Serialization of results: JSON with every float written at 17 significant
//! digits, and comma-separated tables with a header row.

use std::fmt::Write as _;
use std::io;

use serde::Serialize;
use serde_json::ser::{Formatter, Serializer};

use crate::extension::FullState;
use crate::family::{EquilibriumFamily, Extrapolation};
use crate::lambda_omega::Trajectory;
use crate::lattice::LatticeIndex;
use crate::solver::ReducedState;
use crate::spectral::{LinearizationOperator, LinfDecayTable};

/// Fixed-width float text used in both JSON and CSV output.
pub fn format_f64(x: f64) -> String {
    format!("{x:.16e}")
}

struct FixedDigits;

impl Formatter for FixedDigits {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(format_f64(value).as_bytes())
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

/// Compact JSON followed by a newline. Non-finite floats become `null`.
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> String {
    let mut out = Vec::new();
    let mut ser = Serializer::with_formatter(&mut out, FixedDigits);
    value.serialize(&mut ser).expect("in-memory serialization");
    out.push(b'\n');
    String::from_utf8(out).expect("serde_json writes UTF-8")
}

#[derive(Serialize)]
struct CellValue {
    i: i64,
    j: i64,
    value: f64,
}

#[derive(Serialize)]
struct ReducedDoc<'a> {
    n: usize,
    cells: Vec<CellValue>,
    #[serde(skip_serializing_if = "Option::is_none")]
    report: Option<&'a crate::solver::SolveReport>,
}

fn cells_of(state: &ReducedState) -> Vec<CellValue> {
    state
        .iter()
        .map(|(c, v)| CellValue {
            i: c.i,
            j: c.j,
            value: v,
        })
        .collect()
}

pub fn reduced_json(state: &ReducedState, report: Option<&crate::solver::SolveReport>) -> String {
    to_json(&ReducedDoc {
        n: state.n(),
        cells: cells_of(state),
        report,
    })
}

/// `i,j,theta` rows in reduced-layout order.
pub fn reduced_csv(state: &ReducedState) -> String {
    let mut s = String::from("i,j,theta\n");
    for (c, v) in state.iter() {
        let _ = writeln!(s, "{},{},{}", c.i, c.j, format_f64(v));
    }
    s
}

/// One row per lattice row `j`, one column per `i`.
pub fn full_csv(full: &FullState) -> String {
    let layout = full.layout();
    let mut s = String::from("j");
    for i in layout.min()..=layout.max() {
        let _ = write!(s, ",i={i}");
    }
    s.push('\n');
    for (j, row) in full.rows() {
        let _ = write!(s, "{j}");
        for v in row {
            let _ = write!(s, ",{}", format_f64(v));
        }
        s.push('\n');
    }
    s
}

#[derive(Serialize)]
struct FullDoc {
    n: usize,
    min: i64,
    max: i64,
    /// Rows of constant `j` from `min` to `max`, `i` increasing.
    rows: Vec<Vec<f64>>,
}

pub fn full_json(full: &FullState) -> String {
    to_json(&FullDoc {
        n: full.n(),
        min: full.layout().min(),
        max: full.layout().max(),
        rows: full.rows().map(|(_, r)| r).collect(),
    })
}

/// Object keyed by `N`, each member with its cells and solve report.
pub fn family_json(family: &EquilibriumFamily) -> String {
    let map: std::collections::BTreeMap<String, ReducedDoc> = family
        .reports()
        .map(|r| {
            (
                r.n.to_string(),
                ReducedDoc {
                    n: r.n,
                    cells: cells_of(&r.state),
                    report: Some(r),
                },
            )
        })
        .collect();
    to_json(&map)
}

/// `N,increment` rows.
pub fn increments_csv(e: &Extrapolation) -> String {
    let mut s = String::from("N,increment\n");
    for &(n, d) in &e.increments {
        let _ = writeln!(s, "{n},{}", format_f64(d));
    }
    s
}

#[derive(Serialize)]
struct OperatorHeader {
    dimension: usize,
    pinned: Option<LatticeIndex>,
    centre: LatticeIndex,
    truncation_radius: usize,
    nnz: usize,
    cells: Vec<LatticeIndex>,
}

pub fn operator_header_json(op: &LinearizationOperator) -> String {
    to_json(&OperatorHeader {
        dimension: op.dimension(),
        pinned: op.pinned(),
        centre: op.centre(),
        truncation_radius: op.truncation_radius(),
        nnz: op.matrix().nnz(),
        cells: op.cells().to_vec(),
    })
}

/// `row,col,value` triplets of `L`.
pub fn operator_triplets_csv(op: &LinearizationOperator) -> String {
    let mut s = String::from("row,col,value\n");
    for (r, c, v) in op.matrix().triplets() {
        let _ = writeln!(s, "{r},{c},{}", format_f64(v));
    }
    s
}

/// `n,witness_sup,image_sup,bound` rows.
pub fn decay_csv(table: &LinfDecayTable) -> String {
    let mut s = String::from("n,witness_sup,image_sup,bound\n");
    for r in &table.rows {
        let _ = writeln!(
            s,
            "{},{},{},{}",
            r.n,
            format_f64(r.witness_sup),
            format_f64(r.image_sup),
            format_f64(r.bound)
        );
    }
    s
}

/// `t,i,j,re,im` rows.
pub fn trajectory_csv(traj: &Trajectory) -> String {
    let mut s = String::from("t,i,j,re,im\n");
    for (t, c, z) in traj.rows() {
        let _ = writeln!(
            s,
            "{},{},{},{},{}",
            format_f64(t),
            c.i,
            c.j,
            format_f64(z.re),
            format_f64(z.im)
        );
    }
    s
}
