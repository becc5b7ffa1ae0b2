use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::pipeline::{DefectRecord, FiniteRecord, SampleRecord};
use super::CliError;

pub const REPORT_SCHEMA: &str = "dirac-weyl-report/1";

/// 17 significant digits; `NaN`/`inf` spelled out; empty for missing values.
pub fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

/// `re_lambda,im_lambda,re_m_00,im_m_00,…,norm_residual,eq339,eq340,schur_norm,converged,l_used`.
pub fn msamples_header(p: usize) -> String {
    let mut h = String::from("re_lambda,im_lambda");
    for i in 0..p {
        for j in 0..p {
            let _ = write!(h, ",re_m_{i}{j},im_m_{i}{j}");
        }
    }
    h.push_str(",norm_residual,eq339,eq340,schur_norm,converged,l_used");
    h
}

pub fn msamples_csv(p: usize, rows: &[SampleRecord]) -> String {
    let mut out = msamples_header(p);
    out.push('\n');
    for r in rows {
        let _ = write!(out, "{},{}", num(r.lambda[0]), num(r.lambda[1]));
        for i in 0..p {
            for j in 0..p {
                match &r.m {
                    Some(m) => {
                        let [re, im] = m.0[i][j];
                        let _ = write!(out, ",{},{}", num(re), num(im));
                    }
                    None => out.push_str(",,"),
                }
            }
        }
        let _ = writeln!(
            out,
            ",{},{},{},{},{},{}",
            opt(r.norm_residual),
            opt(r.eq339),
            opt(r.eq340),
            opt(r.schur_norm),
            r.converged,
            opt(r.l_used)
        );
    }
    out
}

/// Half-line header; the exponent columns run largest first.
pub fn defects_header(n: usize) -> String {
    let mut h = String::from("re_lambda,im_lambda,regime,count,expected,indeterminate,margin");
    for k in 0..n {
        let _ = write!(h, ",exponent_{k}");
    }
    h.push_str(",verdict");
    h
}

pub fn defects_csv(n: usize, rows: &[DefectRecord]) -> String {
    let mut out = defects_header(n);
    out.push('\n');
    for r in rows {
        let _ = write!(
            out,
            "{},{},{},{},{},{},{}",
            num(r.lambda[0]),
            num(r.lambda[1]),
            r.regime.as_str(),
            r.count,
            r.expected.map(|e| e.to_string()).unwrap_or_default(),
            r.indeterminate,
            num(r.margin)
        );
        for e in &r.exponents {
            let _ = write!(out, ",{}", num(*e));
        }
        let _ = writeln!(out, ",{}", r.verdict);
    }
    out
}

pub const FINITE_HEADER: &str =
    "re_lambda,im_lambda,length,n,kernel_dim,kernel_dim_adjoint,trace_rank,defect_sum,verdict";

pub fn finite_csv(rows: &[FiniteRecord]) -> String {
    let mut out = String::from(FINITE_HEADER);
    out.push('\n');
    for r in rows {
        let c = &r.check;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            num(c.lambda.re),
            num(c.lambda.im),
            num(c.length),
            c.n,
            c.kernel_dim,
            c.kernel_dim_adjoint,
            c.trace_rank.map(|t| t.to_string()).unwrap_or_default(),
            c.defect_sum,
            r.verdict
        );
    }
    out
}

pub fn write_file(dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(name), contents)?;
    Ok(())
}
