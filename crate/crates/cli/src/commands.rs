use std::fs;
use std::path::Path;

use serde::Serialize;
use witnesskit::measures::{
    bnt_from_measure, gbi_violation, hs_measure_isotropic, nearest_separable, MeasureRow,
};
use witnesskit::report::format_sig;
use witnesskit::states::{gamma_signs, isotropic};
use witnesskit::witness::{chsh_max, optimal_witness_isotropic, verify_nearest_separable};
use witnesskit::{DensityMatrix, Error, IsotropicParams, MeasureResult, ProjectionConfig};

use crate::args::{Command, Format};
use crate::{projection_config, solver_config, CliError, Report};

pub(crate) fn execute(cmd: &Command) -> Result<Report, CliError> {
    match cmd {
        Command::IsoSweep {
            d,
            alpha,
            numeric,
            common,
        } => {
            let cfg = projection_config(common)?;
            let params = params_for(*d, &alpha.0)?;
            let rows = params
                .into_iter()
                .map(|p| iso_row(p, *numeric, &cfg))
                .collect::<Result<Vec<_>, _>>()?;
            measure_report(rows, common.format)
        }
        Command::Bnt { d, alpha, common } => {
            let cfg = projection_config(common)?;
            let params = params_for(*d, &alpha.0)?;
            let rows = params
                .into_iter()
                .map(|p| bnt_row(p, &cfg))
                .collect::<Result<Vec<_>, _>>()?;
            measure_report(rows, common.format)
        }
        Command::Measure {
            d,
            alpha,
            state,
            common,
        } => {
            let cfg = projection_config(common)?;
            let targets = match state {
                Some(path) => vec![(load_state(path)?, None)],
                None => {
                    let d = d.expect("clap requires --d without --state");
                    let alphas = &alpha.as_ref().expect("clap requires --alpha").0;
                    params_for(d, alphas)?
                        .into_iter()
                        .map(|p| (isotropic(p), Some(p)))
                        .collect()
                }
            };
            let records = targets
                .into_iter()
                .map(|(t, p)| measure_record(&t, p, &cfg))
                .collect::<Result<Vec<_>, _>>()?;
            measure_state_report(records, common.format)
        }
        Command::WitnessCheck {
            d,
            alpha,
            guess_alpha,
            common,
        } => {
            let solver = solver_config(common)?;
            let guess = IsotropicParams::new(
                *d,
                guess_alpha.unwrap_or_else(|| IsotropicParams::threshold(*d)),
            )?;
            let mut rows = Vec::new();
            for p in params_for(*d, &alpha.0)? {
                let r = verify_nearest_separable(&isotropic(guess), &isotropic(p), &solver)?;
                rows.push(WitnessRow {
                    d: *d,
                    alpha: p.alpha(),
                    guess_alpha: guess.alpha(),
                    offset_c: r.candidate.offset_c,
                    distance: r.candidate.distance,
                    ent_expectation: r.ent_expectation,
                    sep_minimum: r.sep_minimum,
                    is_witness: r.is_witness,
                    is_optimal: r.is_optimal,
                });
            }
            table_report(&rows, common.format, WitnessRow::HEADER, WitnessRow::fields)
        }
        Command::ChshScan { alpha, common } => {
            let solver = solver_config(common)?;
            let mut rows = Vec::new();
            for p in params_for(2, &alpha.0)? {
                let opt = chsh_max(&isotropic(p), solver.n_starts, solver.seed)?;
                let gbi = if p.is_entangled() {
                    hs_measure_isotropic(p)?
                } else {
                    0.0
                };
                rows.push(ChshRow {
                    alpha: p.alpha(),
                    chsh_max: opt.value,
                    violates_chsh: opt.value > 2.0 + 1e-9,
                    gbi_violation: gbi,
                    entangled: p.is_entangled(),
                });
            }
            table_report(&rows, common.format, ChshRow::HEADER, ChshRow::fields)
        }
        Command::GammaSigns { d, format, .. } => {
            let signs = gamma_signs(*d)?;
            let body = match format {
                Format::Csv => {
                    let line: Vec<&str> = signs
                        .iter()
                        .map(|&s| if s > 0 { "+" } else { "\u{2212}" })
                        .collect();
                    format!("{}\n", line.join(" "))
                }
                Format::Json => {
                    let v = serde_json::json!({ "d": d, "signs": signs });
                    format!(
                        "{}\n",
                        serde_json::to_string_pretty(&v).map_err(Error::from)?
                    )
                }
            };
            Ok(Report {
                body,
                unconverged: Vec::new(),
            })
        }
    }
}

fn params_for(d: usize, alphas: &[f64]) -> Result<Vec<IsotropicParams>, CliError> {
    alphas
        .iter()
        .map(|&a| IsotropicParams::new(d, a).map_err(CliError::from))
        .collect()
}

fn load_state(path: &Path) -> Result<DensityMatrix, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Ok(DensityMatrix::from_json(&text)?)
}

fn closed_form(p: IsotropicParams) -> Result<f64, CliError> {
    if p.is_entangled() {
        Ok(hs_measure_isotropic(p)?)
    } else {
        Ok(0.0)
    }
}

/// Runs the projection, keeping the partial result if the budget runs out.
fn project(target: &DensityMatrix, cfg: &ProjectionConfig) -> Result<MeasureResult, CliError> {
    match nearest_separable(target, cfg) {
        Ok(m) => Ok(m),
        Err(Error::ProjectionNoConvergence { partial }) => Ok(*partial),
        Err(e) => Err(e.into()),
    }
}

/// Convergence failures of the inner solver leave the value empty and mark
/// the row instead of aborting the run.
fn soft<T>(r: witnesskit::Result<T>, converged: &mut bool) -> Result<Option<T>, CliError> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(e) if e.is_convergence_failure() => {
            *converged = false;
            Ok(None)
        }
        Err(e) => Err(e.into()),
    }
}

fn iso_row(
    p: IsotropicParams,
    numeric: bool,
    cfg: &ProjectionConfig,
) -> Result<MeasureRow, CliError> {
    let target = isotropic(p);
    let d_closed = closed_form(p)?;
    let mut converged = true;
    let b = if p.is_entangled() {
        let a = optimal_witness_isotropic(p)?;
        soft(gbi_violation(&target, &a, &cfg.solver), &mut converged)?
    } else {
        Some(0.0)
    };
    let measure = if numeric {
        let m = project(&target, cfg)?;
        converged &= m.converged;
        Some(m)
    } else {
        None
    };
    let d_used = measure.as_ref().map_or(d_closed, |m| m.distance);
    Ok(MeasureRow {
        d: p.d(),
        alpha: Some(p.alpha()),
        d_closed: Some(d_closed),
        d_numeric: measure.as_ref().map(|m| m.distance),
        b,
        discrepancy: b.map(|b| (d_used - b).abs()),
        gap: measure.as_ref().map(|m| m.gap_certificate),
        iters: measure.as_ref().map(|m| m.iterations),
        converged,
    })
}

fn bnt_row(p: IsotropicParams, cfg: &ProjectionConfig) -> Result<MeasureRow, CliError> {
    let target = isotropic(p);
    let measure = project(&target, cfg)?;
    let mut converged = measure.converged;
    let (gap, iters, distance) = (
        measure.gap_certificate,
        measure.iterations,
        measure.distance,
    );
    // a separable target has no separating hyperplane; its violation is zero
    let b = if p.is_entangled() {
        soft(
            bnt_from_measure(&target, measure, &cfg.solver),
            &mut converged,
        )?
        .map(|r| r.b_value)
    } else {
        Some(0.0)
    };
    Ok(MeasureRow {
        d: p.d(),
        alpha: Some(p.alpha()),
        d_closed: Some(closed_form(p)?),
        d_numeric: Some(distance),
        b,
        discrepancy: b.map(|b| (distance - b).abs()),
        gap: Some(gap),
        iters: Some(iters),
        converged,
    })
}

#[derive(Serialize)]
struct MeasureRecord {
    #[serde(flatten)]
    row: MeasureRow,
    nearest: DensityMatrix,
}

fn measure_record(
    target: &DensityMatrix,
    p: Option<IsotropicParams>,
    cfg: &ProjectionConfig,
) -> Result<MeasureRecord, CliError> {
    let m = project(target, cfg)?;
    Ok(MeasureRecord {
        row: MeasureRow {
            d: target.d_a(),
            alpha: p.map(|p| p.alpha()),
            d_closed: p.map(closed_form).transpose()?,
            d_numeric: Some(m.distance),
            b: None,
            discrepancy: None,
            gap: Some(m.gap_certificate),
            iters: Some(m.iterations),
            converged: m.converged,
        },
        nearest: m.nearest_density(),
    })
}

fn row_label(row: &MeasureRow) -> String {
    match row.alpha {
        Some(a) => format!("d={} alpha={}", row.d, format_sig(a)),
        None => format!("d={}", row.d),
    }
}

fn measure_report(rows: Vec<MeasureRow>, format: Format) -> Result<Report, CliError> {
    let unconverged = rows
        .iter()
        .filter(|r| !r.converged)
        .map(row_label)
        .collect();
    let body = match format {
        Format::Csv => csv_body(&MeasureRow::CSV_HEADER, rows.iter().map(|r| r.csv_fields()))?,
        Format::Json => json_body(&rows)?,
    };
    Ok(Report { body, unconverged })
}

fn measure_state_report(records: Vec<MeasureRecord>, format: Format) -> Result<Report, CliError> {
    let unconverged = records
        .iter()
        .filter(|r| !r.row.converged)
        .map(|r| row_label(&r.row))
        .collect();
    let body = match format {
        Format::Csv => csv_body(
            &MeasureRow::CSV_HEADER,
            records.iter().map(|r| r.row.csv_fields()),
        )?,
        Format::Json => json_body(&records)?,
    };
    Ok(Report { body, unconverged })
}

fn table_report<R: Serialize>(
    rows: &[R],
    format: Format,
    header: &[&str],
    fields: fn(&R) -> Vec<String>,
) -> Result<Report, CliError> {
    let body = match format {
        Format::Csv => csv_body(header, rows.iter().map(fields))?,
        Format::Json => json_body(rows)?,
    };
    Ok(Report {
        body,
        unconverged: Vec::new(),
    })
}

fn csv_body(header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn json_body<T: Serialize + ?Sized>(v: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(v).map_err(Error::from)?;
    s.push('\n');
    Ok(s)
}

#[derive(Serialize)]
struct WitnessRow {
    d: usize,
    alpha: f64,
    guess_alpha: f64,
    offset_c: f64,
    distance: f64,
    ent_expectation: f64,
    sep_minimum: f64,
    is_witness: bool,
    is_optimal: bool,
}

impl WitnessRow {
    const HEADER: &'static [&'static str] = &[
        "d",
        "alpha",
        "guess_alpha",
        "offset_c",
        "distance",
        "ent_expectation",
        "sep_minimum",
        "is_witness",
        "is_optimal",
    ];

    fn fields(&self) -> Vec<String> {
        vec![
            self.d.to_string(),
            format_sig(self.alpha),
            format_sig(self.guess_alpha),
            format_sig(self.offset_c),
            format_sig(self.distance),
            format_sig(self.ent_expectation),
            format_sig(self.sep_minimum),
            self.is_witness.to_string(),
            self.is_optimal.to_string(),
        ]
    }
}

#[derive(Serialize)]
struct ChshRow {
    alpha: f64,
    chsh_max: f64,
    violates_chsh: bool,
    gbi_violation: f64,
    entangled: bool,
}

impl ChshRow {
    const HEADER: &'static [&'static str] = &[
        "alpha",
        "chsh_max",
        "violates_chsh",
        "gbi_violation",
        "entangled",
    ];

    fn fields(&self) -> Vec<String> {
        vec![
            format_sig(self.alpha),
            format_sig(self.chsh_max),
            self.violates_chsh.to_string(),
            format_sig(self.gbi_violation),
            self.entangled.to_string(),
        ]
    }
}
