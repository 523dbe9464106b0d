//! Rendering of verification reports, factor summaries and model information.

use std::fmt::Write;

use serde_json::{json, Value};
use specfac_core::realization::ReferenceFamily;
use specfac_core::Complex64;
use specfac_core::{FlipReport, SchurStructure};

use crate::json::to_canonical_string;
use crate::model_io::matrix_value;

/// Output style selected by `--format`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Text,
}

pub fn report_value(r: &FlipReport) -> Value {
    serde_json::to_value(r).expect("reports serialize")
}

pub fn render_report(r: &FlipReport, format: Format) -> String {
    match format {
        Format::Json => to_canonical_string(&report_value(r)),
        Format::Text => report_text(r),
    }
}

fn complex(z: &[f64; 2]) -> String {
    if z[1] == 0.0 {
        format!("{:.12e}", z[0])
    } else {
        format!("{:.12e}{:+.12e}i", z[0], z[1])
    }
}

fn complex_list(v: &[[f64; 2]]) -> String {
    v.iter().map(complex).collect::<Vec<_>>().join(", ")
}

fn report_text(r: &FlipReport) -> String {
    let mut s = String::new();
    let verdict = if r.passed() { "PASS" } else { "FAIL" };
    writeln!(s, "verdict: {verdict}").unwrap();
    if !r.failures.is_empty() {
        writeln!(s, "failures: {}", r.failures.join(", ")).unwrap();
    }
    writeln!(s, "spectral error: {:.6e} (tolerance {:.6e})", r.spectral_error, r.spectral_tolerance).unwrap();
    for (name, value) in &r.riccati_residuals {
        writeln!(s, "residual {name}: {value:.6e}").unwrap();
    }
    if let Some(e) = r.diagram_error {
        writeln!(s, "diagram error: {e:.6e}").unwrap();
    }
    if let Some(b) = r.same_pole_structure {
        writeln!(s, "same pole structure: {b}").unwrap();
    }
    if let Some(b) = r.same_zero_structure {
        writeln!(s, "same zero structure: {b}").unwrap();
    }
    writeln!(s, "poles: [{}]", complex_list(&r.poles)).unwrap();
    writeln!(s, "zeros: [{}]", complex_list(&r.zeros)).unwrap();
    s
}

fn pair(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

fn blocks_value(s: &SchurStructure) -> Value {
    Value::Array(
        s.blocks()
            .iter()
            .enumerate()
            .map(|(i, b)| json!({"index": i, "size": b.size, "eigenvalues": b.eigenvalues().into_iter().map(pair).collect::<Vec<_>>()}))
            .collect(),
    )
}

/// Admissible model: poles, zeros, Γ and the block tables that FlipSpecs index into.
pub fn info_value(fam: &ReferenceFamily) -> Value {
    let m = fam.model();
    json!({
        "admissible": true,
        "order": m.order(),
        "outputs": m.outputs(),
        "poles": fam.pole_structure().eigenvalues().into_iter().map(pair).collect::<Vec<_>>(),
        "zeros": fam.zero_structure().eigenvalues().into_iter().map(pair).collect::<Vec<_>>(),
        "gamma": matrix_value(fam.gamma()),
        "zero_blocks": blocks_value(fam.zero_structure()),
        "pole_blocks": blocks_value(fam.pole_structure()),
        "pole_flips_available": !fam.a_is_singular(),
    })
}

fn blocks_text(s: &mut String, title: &str, st: &SchurStructure) {
    writeln!(s, "{title}").unwrap();
    for (i, b) in st.blocks().iter().enumerate() {
        let ev: Vec<String> = b.eigenvalues().into_iter().map(|z| complex(&pair(z))).collect();
        writeln!(s, "  {i}: {}", ev.join(", ")).unwrap();
    }
}

pub fn render_info(fam: &ReferenceFamily, format: Format) -> String {
    if format == Format::Json {
        return to_canonical_string(&info_value(fam));
    }
    let m = fam.model();
    let mut s = String::new();
    writeln!(s, "admissible: yes (n = {}, m = {})", m.order(), m.outputs()).unwrap();
    let list = |v: Vec<Complex64>| v.into_iter().map(|z| complex(&pair(z))).collect::<Vec<_>>().join(", ");
    writeln!(s, "poles: [{}]", list(fam.pole_structure().eigenvalues())).unwrap();
    writeln!(s, "zeros: [{}]", list(fam.zero_structure().eigenvalues())).unwrap();
    writeln!(s, "gamma:").unwrap();
    let g = fam.gamma();
    for i in 0..g.nrows() {
        let row: Vec<String> = (0..g.ncols()).map(|j| format!("{:>20.12e}", g[(i, j)])).collect();
        writeln!(s, "  {}", row.join(" ")).unwrap();
    }
    blocks_text(&mut s, "zero blocks (--zero-keep):", fam.zero_structure());
    blocks_text(&mut s, "pole blocks (--pole-keep):", fam.pole_structure());
    if fam.a_is_singular() {
        writeln!(s, "note: A is singular, so every pole block must be kept").unwrap();
    }
    s
}
