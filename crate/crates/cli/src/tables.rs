//! CSV and JSON writers behind the table subcommands.

use fockgen::amplitudes::{evolve_state, k_particle_amplitude, position_amplitudes, AmplitudeRequest};
use fockgen::calibration::kernel_filter;
use fockgen::checks::kernel_table;
use fockgen::fock::{build_fock_with_budget, ladder, FockSpace, LadderKind, Normalization, State};
use fockgen::grid::{Basis, Grid, Vec3};
use fockgen::specfun::{Kernel, KernelKind};
use fockgen::states::gaussian_state;
use serde::Serialize;

use crate::config::RunConfig;
use crate::{budget, CliError};

pub const KERNEL_HEADER: [&str; 8] = ["r", "analytic", "lattice", "abs_err", "rel_err", "valid", "analytic_im", "lattice_im"];

#[derive(Clone, Debug, PartialEq)]
pub struct KernelRequest {
    pub kind: KernelKind,
    pub r_min: f64,
    pub r_max: f64,
    pub steps: usize,
    /// Damp the zone edge before comparing (see `SpectralFilter`).
    pub filtered: bool,
}

fn csv_text(rows: Vec<Vec<String>>) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.write_record(&r).map_err(|e| CliError::Io(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv of ascii numbers"))
}

/// Analytic kernel against the FFT lattice kernel on radii along the first
/// axis. Radii are snapped to sites; rows outside `2a <= r <= Na/4` (or
/// inside the light cone) are flagged with `valid = false`, not dropped.
pub fn cmd_kernel(config: &RunConfig, req: &KernelRequest) -> Result<String, CliError> {
    config.grid.validate()?;
    if !(req.r_min.is_finite() && req.r_max.is_finite() && req.r_min > 0.0 && req.r_max >= req.r_min) {
        return Err(CliError::Config(format!("radius range [{}, {}] must satisfy 0 < r_min <= r_max", req.r_min, req.r_max)));
    }
    if req.steps == 0 {
        return Err(CliError::Config("steps must be at least 1".into()));
    }
    let grid = Grid::new(config.grid)?;
    let kernel = Kernel::new(req.kind, grid.mass(), grid.dim())?;
    let radii: Vec<f64> = (0..req.steps)
        .map(|i| {
            if req.steps == 1 {
                req.r_min
            } else {
                req.r_min + (req.r_max - req.r_min) * i as f64 / (req.steps - 1) as f64
            }
        })
        .collect();
    let table = kernel_table(&grid, &kernel, &radii, req.filtered.then(kernel_filter))?;
    let mut rows = vec![KERNEL_HEADER.iter().map(|s| s.to_string()).collect()];
    for r in table {
        rows.push(vec![
            r.r.to_string(),
            r.analytic.re.to_string(),
            r.lattice.re.to_string(),
            r.abs_err.to_string(),
            r.rel_err.to_string(),
            r.valid.to_string(),
            r.analytic.im.to_string(),
            r.lattice.im.to_string(),
        ]);
    }
    csv_text(rows)
}

/// Parses `"i,j,k;i,j,k"` into per-site axis offsets; missing trailing axes
/// are zero.
pub fn parse_sites(text: &str, n: usize) -> Result<Vec<Vec<i64>>, CliError> {
    if text.trim().is_empty() {
        return Ok(Vec::new());
    }
    text.split(';')
        .map(|site| {
            let mut v: Vec<i64> = site
                .split(',')
                .map(|c| c.trim().parse::<i64>().map_err(|_| CliError::Config(format!("bad site offset {c:?}"))))
                .collect::<Result<_, _>>()?;
            if v.len() > n {
                return Err(CliError::Config(format!("site {site:?} has more than {n} offsets")));
            }
            v.resize(n, 0);
            Ok(v)
        })
        .collect()
}

/// Parses `"t1,t2,..."`.
pub fn parse_list(text: &str) -> Result<Vec<f64>, CliError> {
    text.split(',')
        .map(|c| c.trim().parse::<f64>().map_err(|_| CliError::Config(format!("bad number {c:?}"))))
        .collect()
}

fn vec3(v: &[f64]) -> Vec3 {
    let mut out = [0.0; 3];
    for (o, x) in out.iter_mut().zip(v) {
        *o = *x;
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub enum Initial {
    /// Localized at one site, `a~(x)^dagger |0>`.
    Delta(Vec<i64>),
    Gaussian { sigma: f64, p0: Vec<f64>, x0: Vec<f64> },
}

fn site_index(grid: &Grid, offsets: &[i64]) -> usize {
    grid.site_of_offsets(offsets)
}

fn one_particle(fock: &FockSpace, initial: &Initial) -> Result<State, CliError> {
    let grid = fock.grid();
    Ok(match initial {
        Initial::Delta(offsets) => {
            let c = ladder(fock, site_index(grid, offsets), Basis::Coordinate, LadderKind::Create, Normalization::Noncovariant)?;
            State::vacuum(fock).apply(&c)?
        }
        Initial::Gaussian { sigma, p0, x0 } => {
            if !(sigma.is_finite() && *sigma > 0.0) {
                return Err(CliError::Config(format!("gaussian width must be positive, got {sigma}")));
            }
            State::one_particle(fock, &gaussian_state(grid, &vec3(p0), &vec3(x0), *sigma))?
        }
    })
}

/// Position amplitudes of an evolving one-particle state. One row per time
/// and site: `t, x.., re, im, modulus2`.
pub fn cmd_evolve(config: &RunConfig, initial: &Initial, times: &[f64]) -> Result<String, CliError> {
    config.grid.validate()?;
    let grid = Grid::new(config.grid)?;
    let fock = build_fock_with_budget(&grid, 1, budget())?;
    let psi = one_particle(&fock, initial)?;
    let axes = ["x", "y", "z"];
    let mut header = vec!["t".to_string()];
    header.extend(axes[..grid.dim()].iter().map(|s| s.to_string()));
    header.extend(["re", "im", "modulus2"].map(String::from));
    let mut rows = vec![header];
    for &t in times {
        let amps = position_amplitudes(&fock, &evolve_state(&fock, &psi, t)?)?;
        for (site, a) in amps.iter().enumerate() {
            let x = grid.position(site);
            let mut row = vec![t.to_string()];
            row.extend(x[..grid.dim()].iter().map(|v| v.to_string()));
            row.extend([a.re.to_string(), a.im.to_string(), a.norm_sqr().to_string()]);
            rows.push(row);
        }
    }
    csv_text(rows)
}

#[derive(Clone, Debug, PartialEq)]
pub enum StateSpec {
    Vacuum,
    /// Normalized `prod a~(x_i)^dagger |0>`.
    Product(Vec<Vec<i64>>),
    OneParticle(Initial),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AmplitudeOutput {
    pub positions: Vec<Vec<i64>>,
    pub t: f64,
    pub re: f64,
    pub im: f64,
    pub modulus2: f64,
    pub sector_mismatch: bool,
}

pub fn build_state(fock: &FockSpace, spec: &StateSpec) -> Result<State, CliError> {
    Ok(match spec {
        StateSpec::Vacuum => State::vacuum(fock),
        StateSpec::Product(sites) => {
            if sites.len() > fock.max_particles() {
                return Err(CliError::Config(format!("{} particles exceed K = {}", sites.len(), fock.max_particles())));
            }
            let mut s = State::vacuum(fock);
            for site in sites {
                let c = ladder(fock, site_index(fock.grid(), site), Basis::Coordinate, LadderKind::Create, Normalization::Noncovariant)?;
                s = s.apply(&c)?;
            }
            s.normalized()?
        }
        StateSpec::OneParticle(init) => one_particle(fock, init)?,
    })
}

pub fn amplitude(config: &RunConfig, spec: &StateSpec, positions: &[Vec<i64>], t: f64) -> Result<AmplitudeOutput, CliError> {
    config.grid.validate()?;
    let grid = Grid::new(config.grid)?;
    let fock = build_fock_with_budget(&grid, config.max_particles, budget())?;
    let state = build_state(&fock, spec)?;
    let req = AmplitudeRequest {
        state,
        positions: positions.iter().map(|p| site_index(&grid, p)).collect(),
        t,
    };
    let res = k_particle_amplitude(&fock, &req)?;
    Ok(AmplitudeOutput {
        positions: positions.to_vec(),
        t,
        re: res.value.re,
        im: res.value.im,
        modulus2: res.value.norm_sqr(),
        sector_mismatch: res.sector_mismatch,
    })
}

pub fn cmd_amplitude(config: &RunConfig, spec: &StateSpec, positions: &[Vec<i64>], t: f64) -> Result<String, CliError> {
    let out = amplitude(config, spec, positions, t)?;
    Ok(serde_json::to_string_pretty(&out).expect("amplitude serializes") + "\n")
}

#[cfg(test)]
mod tests {
    use super::*;
    use fockgen::specfun::omega_kernel;

    fn small() -> RunConfig {
        RunConfig { grid: fockgen::grid::GridSpec::new(1, 16, 0.5, 1.0), ..Default::default() }
    }

    #[test]
    fn site_parsing() {
        assert_eq!(parse_sites("1;-2", 1).unwrap(), vec![vec![1], vec![-2]]);
        assert_eq!(parse_sites("1,2", 3).unwrap(), vec![vec![1, 2, 0]]);
        assert!(parse_sites("1,2", 1).is_err());
        assert!(parse_sites("a", 1).is_err());
        assert!(parse_sites("", 1).unwrap().is_empty());
        assert_eq!(parse_list("0, 0.5,1").unwrap(), vec![0.0, 0.5, 1.0]);
    }

    #[test]
    fn omega_csv_columns() {
        let cfg = RunConfig::default();
        let req = KernelRequest { kind: KernelKind::Omega, r_min: 0.25, r_max: 4.0, steps: 4, filtered: true };
        let text = cmd_kernel(&cfg, &req).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), KERNEL_HEADER.join(","));
        let first: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(first[0], "0.25");
        assert_eq!(first[5], "false");
        let last: Vec<&str> = text.lines().last().unwrap().split(',').collect();
        let r: f64 = last[0].parse().unwrap();
        let analytic: f64 = last[1].parse().unwrap();
        assert_eq!(analytic, omega_kernel(1.0, 1, r).unwrap());
        assert_eq!(last[5], "true");
    }

    #[test]
    fn bad_radius_range_is_config_error() {
        let req = KernelRequest { kind: KernelKind::Omega, r_min: 0.0, r_max: 1.0, steps: 3, filtered: false };
        assert!(matches!(cmd_kernel(&RunConfig::default(), &req), Err(CliError::Config(_))));
    }

    #[test]
    fn evolve_probability_per_time() {
        let text = cmd_evolve(&small(), &Initial::Delta(vec![0]), &[0.0, 0.5]).unwrap();
        let mut totals = std::collections::BTreeMap::<String, f64>::new();
        let mut unit_rows = 0;
        for line in text.lines().skip(1) {
            let f: Vec<&str> = line.split(',').collect();
            let p: f64 = f[4].parse().unwrap();
            *totals.entry(f[0].to_string()).or_default() += p;
            if f[0] == "0" && (p - 1.0).abs() < 1e-12 {
                unit_rows += 1;
            }
        }
        assert_eq!(unit_rows, 1);
        for (_, total) in totals {
            assert!((total - 1.0).abs() <= 1e-10);
        }
    }

    #[test]
    fn vacuum_and_mismatch() {
        let v = amplitude(&small(), &StateSpec::Vacuum, &[], 0.3).unwrap();
        assert!((v.modulus2 - 1.0).abs() < 1e-14 && !v.sector_mismatch);
        let m = amplitude(&small(), &StateSpec::Vacuum, &[vec![1]], 0.0).unwrap();
        assert_eq!(m.modulus2, 0.0);
        assert!(m.sector_mismatch);
    }

    #[test]
    fn permuted_positions_identical() {
        let spec = StateSpec::Product(vec![vec![1], vec![-3]]);
        let a = cmd_amplitude(&small(), &spec, &[vec![1], vec![-3]], 0.0).unwrap();
        let b = amplitude(&small(), &spec, &[vec![-3], vec![1]], 0.0).unwrap();
        let a: serde_json::Value = serde_json::from_str(&a).unwrap();
        assert_eq!(a["re"].as_f64().unwrap(), b.re);
        assert_eq!(a["im"].as_f64().unwrap(), b.im);
    }
}
