use std::fs;
use std::path::Path;

use biphoton_capacity::info::{joint_entropy, marginal_entropy_a, marginal_entropy_b};
use biphoton_capacity::{
    conditional_entropy, max_detectable_mi, mutual_information, run_resolution_sweep, separability_sum, Alignment,
    Basis, Direction, JointCountMatrix, WitnessResult,
};
use serde::Serialize;

use crate::config::{Format, RunConfig};
use crate::CliError;

fn create_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("cannot create {}: {e}", dir.display())))
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Runtime(e.to_string()))?;
    write_text(path, &text)
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".to_string(), |v| format!("{v:.4}"))
}

#[derive(Debug, Serialize)]
struct BasisStatistics {
    basis: Basis,
    var_a: f64,
    var_b: f64,
    cov_ab: f64,
    rho: f64,
    marginal_width: f64,
    difference_width: f64,
    sum_width: f64,
}

#[derive(Debug, Serialize)]
struct TheoryReport {
    sigma_c: f64,
    sigma_p: f64,
    wavelength: f64,
    mi_continuous: f64,
    mi_strong_correlation_limit: f64,
    fedorov_ratio: f64,
    bases: Vec<BasisStatistics>,
}

pub fn theory(cfg: &RunConfig, write: bool) -> Result<(), CliError> {
    let state = cfg.state()?;
    let bases = Basis::ALL
        .iter()
        .map(|&basis| {
            let cov = state.pair_covariance(basis);
            let (difference_width, sum_width) = state.rotated_widths(basis);
            BasisStatistics {
                basis,
                var_a: cov.var_a,
                var_b: cov.var_b,
                cov_ab: cov.cov_ab,
                rho: cov.rho,
                marginal_width: cov.marginal_std(),
                difference_width,
                sum_width,
            }
        })
        .collect();
    let report = TheoryReport {
        sigma_c: state.sigma_c(),
        sigma_p: state.sigma_p(),
        wavelength: state.wavelength_nm(),
        mi_continuous: state.mi_continuous(),
        mi_strong_correlation_limit: state.mi_strong_correlation_limit(),
        fedorov_ratio: state.fedorov_ratio(),
        bases,
    };

    println!("mi_continuous               {:.4} bits", report.mi_continuous);
    println!(
        "mi_strong_correlation_limit {:.4} bits",
        report.mi_strong_correlation_limit
    );
    println!("fedorov_ratio               {:.4}", report.fedorov_ratio);
    for b in &report.bases {
        println!(
            "{:<8}  var_a {:.4e}  var_b {:.4e}  cov_ab {:.4e}  rho {:.4}  marginal_width {:.4e}",
            b.basis.as_str(),
            b.var_a,
            b.var_b,
            b.cov_ab,
            b.rho,
            b.marginal_width
        );
    }

    if write {
        create_dir(&cfg.out)?;
        let path = cfg.out.join(format!("theory.{}", cfg.format.extension()));
        match cfg.format {
            Format::Json => write_json(&path, &report)?,
            Format::Csv => {
                let mut text = String::from("quantity,basis,value\n");
                for (q, v) in [
                    ("mi_continuous", report.mi_continuous),
                    ("mi_strong_correlation_limit", report.mi_strong_correlation_limit),
                    ("fedorov_ratio", report.fedorov_ratio),
                ] {
                    text.push_str(&format!("{q},,{v}\n"));
                }
                for b in &report.bases {
                    for (q, v) in [
                        ("var_a", b.var_a),
                        ("var_b", b.var_b),
                        ("cov_ab", b.cov_ab),
                        ("rho", b.rho),
                        ("marginal_width", b.marginal_width),
                        ("difference_width", b.difference_width),
                        ("sum_width", b.sum_width),
                    ] {
                        text.push_str(&format!("{q},{},{v}\n", b.basis));
                    }
                }
                write_text(&path, &text)?;
            }
        }
        eprintln!("wrote {}", path.display());
    }
    Ok(())
}

#[derive(Debug, Serialize)]
pub struct MatrixSummary {
    pub resolution: usize,
    pub basis: Basis,
    pub alignment: Alignment,
    pub mi: f64,
    pub entropy_a: f64,
    pub entropy_b: f64,
    pub joint_entropy: f64,
    pub conditional_entropy_a_given_b: f64,
    pub conditional_entropy_b_given_a: f64,
    pub ceiling: f64,
    pub captured_fraction: f64,
}

pub fn matrix(cfg: &RunConfig, resolution: usize, basis: Basis, alignment: Alignment) -> Result<(), CliError> {
    if resolution == 0 {
        return Err(CliError::Usage("resolution must be at least 1".into()));
    }
    let state = cfg.state()?;
    let joint = cfg
        .sweep_params(0)?
        .theory_matrix(&state, resolution, basis, alignment)?;
    let summary = MatrixSummary {
        resolution,
        basis,
        alignment,
        mi: mutual_information(&joint),
        entropy_a: marginal_entropy_a(&joint),
        entropy_b: marginal_entropy_b(&joint),
        joint_entropy: joint_entropy(&joint),
        conditional_entropy_a_given_b: conditional_entropy(&joint, Direction::AGivenB),
        conditional_entropy_b_given_a: conditional_entropy(&joint, Direction::BGivenA),
        ceiling: max_detectable_mi(joint.n_a())?,
        captured_fraction: joint.captured_fraction(),
    };

    create_dir(&cfg.out)?;
    let ext = cfg.format.extension();
    let stem = format!("matrix_{resolution}_{basis}_{alignment}");
    let matrix_path = cfg.out.join(format!("{stem}.{ext}"));
    let summary_path = cfg.out.join(format!("{stem}_summary.{ext}"));
    match cfg.format {
        Format::Csv => {
            joint.write_csv(&matrix_path)?;
            let s = &summary;
            write_text(
                &summary_path,
                &format!(
                    "resolution,basis,alignment,mi,entropy_a,entropy_b,joint_entropy,\
                     conditional_entropy_a_given_b,conditional_entropy_b_given_a,ceiling,captured_fraction\n\
                     {},{},{},{},{},{},{},{},{},{},{}\n",
                    s.resolution,
                    s.basis,
                    s.alignment,
                    s.mi,
                    s.entropy_a,
                    s.entropy_b,
                    s.joint_entropy,
                    s.conditional_entropy_a_given_b,
                    s.conditional_entropy_b_given_a,
                    s.ceiling,
                    s.captured_fraction
                ),
            )?;
        }
        Format::Json => {
            joint.write_json(&matrix_path)?;
            write_json(&summary_path, &summary)?;
        }
    }

    println!("{resolution}x{resolution} {basis} {alignment}");
    println!(
        "mi                {:.4} bits (ceiling {:.4})",
        summary.mi, summary.ceiling
    );
    println!("entropy_a         {:.4} bits", summary.entropy_a);
    println!("entropy_b         {:.4} bits", summary.entropy_b);
    println!("joint_entropy     {:.4} bits", summary.joint_entropy);
    println!("H(A|B)            {:.4} bits", summary.conditional_entropy_a_given_b);
    println!("H(B|A)            {:.4} bits", summary.conditional_entropy_b_given_a);
    println!("captured_fraction {:.4}", summary.captured_fraction);
    eprintln!("wrote {} and {}", matrix_path.display(), summary_path.display());
    Ok(())
}

pub fn sweep(cfg: &RunConfig) -> Result<(), CliError> {
    let seed = cfg.require_seed()?;
    let state = cfg.state()?;
    let result = run_resolution_sweep(&state, &cfg.sweep_params(seed)?)?;

    create_dir(&cfg.out)?;
    let ext = cfg.format.extension();
    let sweep_path = cfg.out.join(format!("sweep.{ext}"));
    let witness_path = cfg.out.join(format!("witness.{ext}"));
    match cfg.format {
        Format::Csv => {
            result.write_csv(&sweep_path)?;
            result.write_witness_csv(&witness_path)?;
        }
        Format::Json => {
            write_json(&sweep_path, &result.records)?;
            write_json(&witness_path, &result.witness)?;
        }
    }
    let counts_dir = cfg.out.join("counts");
    create_dir(&counts_dir)?;
    for run in &result.runs {
        let path = counts_dir.join(format!("{}_{}_{}.{ext}", run.n_per_axis, run.basis, run.alignment));
        match cfg.format {
            Format::Csv => run.counts.write_csv(&path)?,
            Format::Json => run.counts.write_json(&path)?,
        }
    }

    println!("n   basis     alignment   mi        sigma    theory    ceiling");
    for r in &result.records {
        for (alignment, est, theory) in [
            (Alignment::Aligned, r.aligned, r.theory_top),
            (Alignment::Misaligned, r.misaligned, r.theory_bottom),
        ] {
            println!(
                "{:<3} {:<9} {:<11} {:<9.4} {:<8.4} {:<9.4} {:.4}",
                r.n_per_axis,
                r.basis.as_str(),
                alignment.as_str(),
                est.value,
                est.uncertainty,
                theory,
                r.ceiling
            );
        }
    }
    println!();
    println!("n   direction  exact     sum       sigma    bound     violated  sigmas");
    for w in &result.witness {
        let s = &w.simulated;
        println!(
            "{:<3} {:<10} {:<9.4} {:<9.4} {:<8.4} {:<9.4} {:<9} {}",
            w.n_per_axis,
            s.direction.to_string(),
            w.exact_sum,
            s.sum,
            s.sigma,
            s.bound,
            s.violated,
            fmt_opt(s.sigmas_of_violation)
        );
    }
    eprintln!(
        "wrote {}, {} and {}",
        sweep_path.display(),
        witness_path.display(),
        counts_dir.display()
    );
    Ok(())
}

fn read_counts(path: &Path) -> Result<JointCountMatrix, CliError> {
    let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
    let counts = if is_json {
        JointCountMatrix::read_json(path)?
    } else {
        JointCountMatrix::read_csv(path)?
    };
    Ok(counts)
}

pub fn witness(cfg: &RunConfig, position: &Path, momentum: &Path, write: bool) -> Result<(), CliError> {
    let pos = read_counts(position)?;
    let mom = read_counts(momentum)?;
    let results = Direction::BOTH
        .iter()
        .map(|&d| separability_sum(&pos, &mom, d))
        .collect::<Result<Vec<WitnessResult>, _>>()?;

    for r in &results {
        println!(
            "{}  sum {:.4}  sigma {:.4}  bound {:.4}  violated {}  sigmas_of_violation {}",
            r.direction,
            r.sum,
            r.sigma,
            r.bound,
            r.violated,
            fmt_opt(r.sigmas_of_violation)
        );
    }

    if write {
        create_dir(&cfg.out)?;
        let path = cfg.out.join(format!("witness_report.{}", cfg.format.extension()));
        match cfg.format {
            Format::Json => write_json(&path, &results)?,
            Format::Csv => {
                let mut text = String::from("direction,sum,sigma,bound,violated,sigmas_of_violation\n");
                for r in &results {
                    text.push_str(&format!(
                        "{},{},{},{},{},{}\n",
                        r.direction,
                        r.sum,
                        r.sigma,
                        r.bound,
                        r.violated,
                        r.sigmas_of_violation.map_or(String::new(), |v| v.to_string())
                    ));
                }
                write_text(&path, &text)?;
            }
        }
        eprintln!("wrote {}", path.display());
    }
    Ok(())
}
