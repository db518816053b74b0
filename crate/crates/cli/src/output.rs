//! JSON and CSV rendering. CSV numbers carry 17 significant digits; absent
//! values are empty cells.

use ising_rg_core::dynamics::{McValues, ObservableValues};

use crate::commands::{Document, Verdict};
use crate::config::Format;
use crate::error::{CliError, CliResult};

pub fn render(doc: &Document, format: Format) -> CliResult<Vec<u8>> {
    match format {
        Format::Json => {
            let mut out =
                serde_json::to_vec_pretty(doc).map_err(|e| CliError::Output(e.to_string()))?;
            out.push(b'\n');
            Ok(out)
        }
        Format::Csv => render_csv(doc),
    }
}

pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

fn pair_cells(v: &ObservableValues) -> Vec<String> {
    match *v {
        ObservableValues::Pair {
            s_hat,
            s_tilde,
            s,
            connected,
        } => vec![num(s_hat), num(s_tilde), num(s), num(connected)],
        ObservableValues::Table { value } => vec![num(value)],
    }
}

fn value_header(v: &ObservableValues) -> Vec<&'static str> {
    match v {
        ObservableValues::Pair { .. } => vec!["s_hat", "s_tilde", "s", "connected"],
        ObservableValues::Table { .. } => vec!["value"],
    }
}

fn render_csv(doc: &Document) -> CliResult<Vec<u8>> {
    let mut rows: Vec<Vec<String>> = Vec::new();
    match doc {
        Document::Correlation(d) => {
            rows.push(vec!["k".into(), "h".into(), "d".into(), "value".into()]);
            for r in &d.rows {
                rows.push(vec![num(r.k), num(r.h), r.d.to_string(), num(r.value)]);
            }
        }
        Document::Observable(d) => {
            let head = [
                "k",
                "boundary",
                "d",
                "s_hat",
                "s_tilde",
                "s",
                "oracle_n",
                "oracle_s_hat",
                "oracle_s_tilde",
            ];
            let mut h: Vec<String> = head.iter().map(|s| s.to_string()).collect();
            h.extend(["oracle_s", "max_gap", "tolerance", "pass"].map(String::from));
            rows.push(h);
            let o = d.oracle.as_ref();
            rows.push(vec![
                num(d.k),
                d.boundary.clone(),
                d.d.to_string(),
                num(d.s_hat),
                num(d.s_tilde),
                num(d.s),
                o.map(|o| o.n_sites.to_string()).unwrap_or_default(),
                opt(o.map(|o| o.s_hat)),
                opt(o.map(|o| o.s_tilde)),
                opt(o.map(|o| o.s)),
                opt(o.map(|o| o.max_gap)),
                opt(o.map(|o| o.tolerance)),
                o.map(|o| o.pass.to_string()).unwrap_or_default(),
            ]);
        }
        Document::RgFlow(d) => {
            rows.push(
                [
                    "n",
                    "k_n",
                    "s_n",
                    "o_hat",
                    "o_tilde",
                    "o",
                    "rate_s_n",
                    "rate_o_hat",
                    "rate_o_tilde",
                    "rate_o",
                ]
                .map(String::from)
                .to_vec(),
            );
            for r in &d.rows {
                rows.push(vec![
                    r.n.to_string(),
                    num(r.k_n),
                    num(r.s_n),
                    num(r.o_hat),
                    num(r.o_tilde),
                    num(r.o),
                    opt(d.rates.s_n),
                    opt(d.rates.o_hat),
                    opt(d.rates.o_tilde),
                    opt(d.rates.o),
                ]);
            }
        }
        Document::Spectrum(d) => {
            rows.push(
                [
                    "index",
                    "eigenvalue",
                    "r",
                    "horizon",
                    "deviation_at_horizon",
                ]
                .map(String::from)
                .to_vec(),
            );
            for (i, e) in d.eigenvalues.iter().enumerate() {
                rows.push(vec![
                    i.to_string(),
                    num(*e),
                    num(d.r),
                    d.horizon.to_string(),
                    num(d.deviation_at_horizon),
                ]);
            }
        }
        Document::Evolve(d) => {
            let mut h = vec!["t".to_string(), "k".into()];
            h.extend(value_header(&d.limit).iter().map(|s| s.to_string()));
            h.push("gap".into());
            h.extend(value_header(&d.limit).iter().map(|s| format!("limit_{s}")));
            rows.push(h);
            for r in &d.rows {
                let mut row = vec![r.point.t.to_string(), num(r.point.k)];
                row.extend(pair_cells(&r.point.values));
                row.push(num(r.gap));
                row.extend(pair_cells(&d.limit));
                rows.push(row);
            }
        }
        Document::Simulate(d) => {
            let mut h = vec!["t".to_string(), "k".into()];
            for name in value_header(&d.limit) {
                h.push(name.to_string());
                h.push(format!("{name}_stderr"));
            }
            h.extend(value_header(&d.limit).iter().map(|s| format!("limit_{s}")));
            h.push("verdict".into());
            rows.push(h);
            let verdict = if d.verdict == Verdict::Pass {
                "PASS"
            } else {
                "FAIL"
            };
            for p in &d.rows {
                let mut row = vec![p.t.to_string(), num(p.k)];
                let ests = match p.values {
                    McValues::Pair {
                        s_hat,
                        s_tilde,
                        s,
                        connected,
                    } => vec![s_hat, s_tilde, s, connected],
                    McValues::Table { value } => vec![value],
                };
                for e in ests {
                    row.push(num(e.value));
                    row.push(num(e.stderr));
                }
                row.extend(pair_cells(&d.limit));
                row.push(verdict.into());
                rows.push(row);
            }
        }
        Document::FreeEnergy(d) => {
            rows.push(
                [
                    "boundary",
                    "n_sites",
                    "log_z_per_bond",
                    "free_energy",
                    "gap",
                ]
                .map(String::from)
                .to_vec(),
            );
            for b in &d.boundaries {
                rows.push(vec![
                    b.boundary.clone(),
                    d.n_sites.to_string(),
                    num(b.log_z_per_bond),
                    num(d.free_energy),
                    num(b.gap),
                ]);
            }
        }
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.write_record(&r)
            .map_err(|e| CliError::Output(e.to_string()))?;
    }
    w.into_inner().map_err(|e| CliError::Output(e.to_string()))
}
