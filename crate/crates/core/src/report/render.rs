use std::fmt::Write;

use crate::betareg::Direction;
use crate::error::Result;
use crate::frequentist::Decision;
use crate::report::analysis::CddReport;

pub fn render_structured(report: &CddReport) -> Result<String> {
    let mut s = serde_json::to_string_pretty(report)?;
    s.push('\n');
    Ok(s)
}

pub fn parse_structured(text: &str) -> Result<CddReport> {
    Ok(serde_json::from_str(text)?)
}

fn decision_label(d: Decision) -> &'static str {
    match d {
        Decision::UToV => "U->V",
        Decision::VToU => "V->U",
        Decision::Inconclusive => "inconclusive",
    }
}

fn num(x: f64) -> String {
    format!("{x:.7}")
}

/// `value` with a trailing `*` when it belongs to the stronger direction.
fn flagged(x: f64, stronger: bool) -> String {
    if stronger {
        format!("{}*", num(x))
    } else {
        num(x)
    }
}

fn pct(x: f64) -> String {
    let s = format!("{x:.1}");
    format!("{}%", s.trim_end_matches(".0"))
}

struct Grid {
    rows: Vec<Vec<String>>,
}

impl Grid {
    fn new(header: &[&str]) -> Self {
        Self {
            rows: vec![header.iter().map(|s| s.to_string()).collect()],
        }
    }

    fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    fn write_to(&self, out: &mut String) {
        let cols = self.rows.iter().map(Vec::len).max().unwrap_or(0);
        let widths: Vec<usize> = (0..cols)
            .map(|c| {
                self.rows
                    .iter()
                    .filter_map(|r| r.get(c))
                    .map(|s| s.chars().count())
                    .max()
                    .unwrap_or(0)
            })
            .collect();
        for row in &self.rows {
            let line: Vec<String> = row.iter().zip(&widths).map(|(s, w)| format!("{s:<w$}")).collect();
            let _ = writeln!(out, "{}", line.join("  ").trim_end());
        }
    }
}

/// Human-readable tables, numbers rounded to 7 decimals.
pub fn render_text(report: &CddReport) -> String {
    let mut out = String::new();
    let st = &report.settings;
    let _ = writeln!(
        out,
        "{} {}  input: {}  seed: {}",
        report.tool, report.version, report.input, st.seed
    );
    let level = pct(100.0 * st.level);

    let freq: Vec<_> = report
        .records
        .iter()
        .filter_map(|r| r.frequentist.as_ref().map(|f| (r, f)))
        .collect();
    if !freq.is_empty() {
        let _ = writeln!(
            out,
            "\nFrequentist CDD (delta = rho2(U->V) - rho2(V->U); {level} percentile bootstrap interval, {} replicates)",
            st.n_boot
        );
        let mut grid = Grid::new(&[
            "Gene U",
            "Gene V",
            "rho2(U->V)",
            "rho2(V->U)",
            "delta",
            "LB(delta)",
            "UB(delta)",
            "decision",
        ]);
        for (r, f) in freq {
            let fit = &f.fit;
            grid.push(vec![
                r.gene_u.clone(),
                r.gene_v.clone(),
                flagged(fit.rho2_uv, fit.rho2_uv > fit.rho2_vu),
                flagged(fit.rho2_vu, fit.rho2_vu > fit.rho2_uv),
                num(fit.delta_rho2),
                num(fit.ci_delta.lower),
                num(fit.ci_delta.upper),
                decision_label(f.decision).to_string(),
            ]);
        }
        grid.write_to(&mut out);
        let _ = writeln!(out, "* stronger direction");
    }

    let bayes: Vec<_> = report
        .records
        .iter()
        .filter_map(|r| r.bayesian.as_ref().map(|b| (r, b)))
        .collect();
    if !bayes.is_empty() {
        let _ = writeln!(
            out,
            "\nBayesian CDD (posterior mean, {level} credible interval below; {} iterations, {} burn-in, thin {})",
            st.n_iter, st.burn_in, st.thin
        );
        let mut grid = Grid::new(&["Gene U", "Gene V", "rho2(U->V)", "rho2(V->U)", "delta"]);
        for (r, b) in &bayes {
            let fit = &b.fit;
            grid.push(vec![
                r.gene_u.clone(),
                r.gene_v.clone(),
                flagged(fit.mean_rho2_uv, fit.mean_rho2_uv > fit.mean_rho2_vu),
                flagged(fit.mean_rho2_vu, fit.mean_rho2_vu > fit.mean_rho2_uv),
                num(fit.mean_delta),
            ]);
            let ci = |i: &crate::frequentist::Interval| format!("({}, {})", num(i.lower), num(i.upper));
            grid.push(vec![
                String::new(),
                String::new(),
                ci(&fit.cred_uv),
                ci(&fit.cred_vu),
                ci(&fit.cred_delta),
            ]);
        }
        grid.write_to(&mut out);
        let _ = writeln!(out, "* stronger direction");

        let _ = writeln!(out, "\nShare of posterior draws suggesting each direction");
        let mut grid = Grid::new(&[
            "Gene U",
            "Gene V",
            "rho2(U->V) > rho2(V->U)",
            "rho2(U->V) < rho2(V->U)",
            "decision",
            "accept U->V",
            "accept V->U",
        ]);
        for (r, b) in &bayes {
            let d = &b.fit.diagnostics;
            grid.push(vec![
                r.gene_u.clone(),
                r.gene_v.clone(),
                pct(b.pct_u_to_v),
                pct(b.pct_v_to_u),
                b.decision.as_str().to_string(),
                format!("{:.3}", d.accept_rate_uv),
                format!("{:.3}", d.accept_rate_vu),
            ]);
        }
        grid.write_to(&mut out);
    }

    let _ = writeln!(out, "\nDirection summary");
    let mut grid = Grid::new(&["Gene U", "Gene V", "frequentist", "bayesian"]);
    for r in &report.records {
        let arrow = |d: Direction| match d {
            Direction::UToV => format!("{} -> {}", r.gene_u, r.gene_v),
            Direction::VToU => format!("{} -> {}", r.gene_v, r.gene_u),
        };
        let freq = r.frequentist.as_ref().map_or("-".to_string(), |f| match f.decision {
            Decision::UToV => arrow(Direction::UToV),
            Decision::VToU => arrow(Direction::VToU),
            Decision::Inconclusive => "inconclusive".to_string(),
        });
        let bayes = r.bayesian.as_ref().map_or("-".to_string(), |b| arrow(b.decision));
        grid.push(vec![r.gene_u.clone(), r.gene_v.clone(), freq, bayes]);
    }
    grid.write_to(&mut out);

    let warnings: Vec<String> = report
        .records
        .iter()
        .flat_map(|r| {
            let chain = r
                .bayesian
                .iter()
                .flat_map(|b| b.fit.diagnostics.warnings.iter())
                .map(move |w| format!("{} / {}: {w}", r.gene_u, r.gene_v));
            let error = r
                .error
                .iter()
                .map(move |e| format!("{} / {}: error: {e}", r.gene_u, r.gene_v));
            chain.chain(error).collect::<Vec<_>>()
        })
        .collect();
    if !warnings.is_empty() {
        let _ = writeln!(out, "\nWarnings");
        for w in warnings {
            let _ = writeln!(out, "  {w}");
        }
    }
    out
}
