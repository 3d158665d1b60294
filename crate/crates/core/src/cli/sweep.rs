//! Parameter sweeps over `(N, n̄, β)`.

use clap::{Args, ValueEnum};
use rayon::prelude::*;

use crate::afa::s1_afa_stationary_mean;
use crate::distributions::{PhotonDensity, TailPolicy, DEFAULT_TAIL_TOL};
use crate::dynamics::{make_tlm_state, Engine, ObservableKind, Scenario};
use crate::error::{Error, Result};

use super::config::{compute, Method, RunConfig};
use super::output::Table;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Statistic {
    StationaryMean,
    Series,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LawKind {
    Fock,
    Coherent,
    Thermal,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    /// Comma-separated molecule counts.
    #[arg(long = "n-tlm", visible_alias = "n", default_value = "4")]
    pub n_tlm: String,
    /// Comma-separated mean photon numbers (photon number for fock).
    #[arg(long, default_value = "1,4,10")]
    pub nbar: String,
    /// Comma-separated β values (exclusive with --delta).
    #[arg(long, allow_hyphen_values = true)]
    pub beta: Option<String>,
    /// Comma-separated Δ values.
    #[arg(long)]
    pub delta: Option<String>,
    #[arg(long, value_enum, default_value = "coherent")]
    pub law: LawKind,
    /// s1 | s2 | s4 | ee
    #[arg(long, default_value = "s1")]
    pub observable: String,
    #[arg(long)]
    pub scenario: Option<String>,
    /// exact | afa
    #[arg(long, default_value = "exact")]
    pub method: String,
    #[arg(long, value_enum, default_value = "stationary-mean")]
    pub statistic: Statistic,
    #[arg(long = "tau-max", default_value_t = 20.0)]
    pub tau_max: f64,
    #[arg(long, default_value_t = 201)]
    pub steps: usize,
    #[arg(long = "tail-tol", default_value_t = DEFAULT_TAIL_TOL)]
    pub tail_tol: f64,
    #[arg(long)]
    pub threads: Option<usize>,
    /// CSV destination (default: stdout).
    #[arg(long)]
    pub output: Option<std::path::PathBuf>,
}

fn parse_list<T: std::str::FromStr>(what: &str, s: &str) -> Result<Vec<T>> {
    s.split(',')
        .map(str::trim)
        .filter(|x| !x.is_empty())
        .map(|x| x.parse().map_err(|_| Error::Config(format!("bad {what} value `{x}`"))))
        .collect()
}

fn law_spec(law: LawKind, nbar: f64) -> String {
    match law {
        LawKind::Fock => format!("fock:{nbar}"),
        LawKind::Coherent => format!("coherent:{nbar}"),
        LawKind::Thermal => format!("thermal:{nbar}"),
    }
}

/// Runs a sweep; rows are ordered by `(N, n̄, β)` regardless of scheduling.
pub fn sweep(args: &SweepArgs, engine: &Engine) -> Result<Table> {
    let ns: Vec<u32> = parse_list("n_tlm", &args.n_tlm)?;
    let nbars: Vec<f64> = parse_list("nbar", &args.nbar)?;
    let (betas, delta_grid): (Vec<f64>, bool) = match (&args.beta, &args.delta) {
        (Some(_), Some(_)) => return Err(Error::Config("beta and delta are mutually exclusive".into())),
        (Some(b), None) => (parse_list("beta", b)?, false),
        (None, Some(d)) => {
            let ds: Vec<f64> = parse_list("delta", d)?;
            if ds.iter().any(|&d| !(d >= 0.0)) {
                return Err(Error::Config("delta values must be non-negative".into()));
            }
            (ds.iter().map(|d| 2.0 * d.sqrt()).collect(), true)
        }
        (None, None) => (vec![0.0], false),
    };
    if ns.contains(&0) {
        return Err(Error::Config("n_tlm values must be at least 1".into()));
    }
    let observable: ObservableKind = args.observable.parse()?;
    let method: super::config::Method = args.method.parse()?;
    if method == Method::Closed {
        return Err(Error::Config("sweeps support exact and afa only".into()));
    }
    let scenario: Scenario = match &args.scenario {
        Some(s) => s.parse()?,
        None if observable == ObservableKind::S4 => Scenario::AllDown,
        None => Scenario::AllUp,
    };

    let mut grid: Vec<(u32, f64, f64)> = Vec::new();
    for &n in &ns {
        for &nb in &nbars {
            for &b in &betas {
                grid.push((n, nb, b));
            }
        }
    }
    grid.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)).then(a.2.total_cmp(&b.2)));
    grid.dedup();

    let meta = vec![
        format!("sweep observable = {observable}, method = {method}, scenario = {scenario}"),
        format!("law = {:?}, statistic = {:?}", args.law, args.statistic).to_lowercase(),
        format!("grid: n_tlm = [{}], nbar = [{}], {} = [{}]", args.n_tlm, args.nbar, if delta_grid { "delta" } else { "beta" },
            args.delta.as_deref().or(args.beta.as_deref()).unwrap_or("0")),
        format!("tail_tol = {:?}", args.tail_tol),
    ];
    let policy = TailPolicy { tail_tol: args.tail_tol, n_trunc: None };

    match args.statistic {
        Statistic::StationaryMean => {
            let mut t = Table::new(meta, ["n_tlm", "nbar", "beta", "value"].map(String::from).to_vec());
            let values: Vec<f64> = grid
                .par_iter()
                .map(|&(n, nb, b)| {
                    let d = PhotonDensity::from_spec(&law_spec(args.law, nb), policy)?;
                    stationary_mean(engine, observable, method, scenario, n, b, &d)
                })
                .collect::<Result<_>>()?;
            t.rows = grid.iter().zip(values).map(|(&(n, nb, b), v)| vec![n as f64, nb, b, v]).collect();
            Ok(t)
        }
        Statistic::Series => {
            let complex = observable == ObservableKind::S2 && method == Method::Exact;
            let mut cols = vec!["n_tlm", "nbar", "beta", "tau", "value_re"];
            if complex {
                cols.push("value_im");
            }
            let mut t = Table::new(meta, cols.into_iter().map(String::from).collect());
            let series = grid
                .par_iter()
                .map(|&(n, nb, b)| {
                    let cfg = RunConfig {
                        observable,
                        method,
                        scenario,
                        n_tlm: n,
                        distribution: law_spec(args.law, nb),
                        beta: b,
                        delta: None,
                        tau_max: args.tau_max,
                        steps: args.steps,
                        tail_tol: args.tail_tol,
                        n_trunc: None,
                        threads: None,
                        output: None,
                        svg: None,
                        pairing: Default::default(),
                    };
                    let d = cfg.density()?;
                    compute(&cfg, engine, &d)
                })
                .collect::<Result<Vec<_>>>()?;
            for (&(n, nb, b), s) in grid.iter().zip(series) {
                let (re, im) = (s.re(), s.im());
                for (i, &tau) in s.tau.iter().enumerate() {
                    let mut row = vec![n as f64, nb, b, tau, re[i]];
                    if complex {
                        row.push(im[i]);
                    }
                    t.rows.push(row);
                }
            }
            Ok(t)
        }
    }
}

fn stationary_mean(
    engine: &Engine,
    observable: ObservableKind,
    method: Method,
    scenario: Scenario,
    n: u32,
    beta: f64,
    d: &PhotonDensity,
) -> Result<f64> {
    match (method, observable) {
        (Method::Exact, ObservableKind::S1) if scenario == Scenario::AllUp => engine.s1_stationary_mean(n, beta, d),
        (Method::Exact, ObservableKind::S4) if scenario == Scenario::AllDown => engine.s4_stationary_mean(n, beta, d),
        (Method::Exact, ObservableKind::S2) if scenario == Scenario::AllUp => engine.s2_constant_term(n, beta, d),
        (Method::Exact, ObservableKind::Ee) => engine.ee_stationary_mean(n, beta, d, &make_tlm_state(scenario, n)?),
        (Method::Afa, ObservableKind::S1) if scenario == Scenario::AllUp => Ok(s1_afa_stationary_mean(n, beta, d)),
        _ => Err(Error::Config(format!(
            "no stationary mean for observable {observable}, method {method}, scenario {scenario}"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::Parser;

    #[derive(Parser)]
    struct Wrap {
        #[command(flatten)]
        a: SweepArgs,
    }

    fn args(extra: &[&str]) -> SweepArgs {
        Wrap::parse_from(std::iter::once("x").chain(extra.iter().copied())).a
    }

    #[test]
    fn one_molecule_fock_is_half() {
        let t = sweep(&args(&["--n-tlm", "1", "--nbar", "0,3,7", "--law", "fock"]), &Engine::new()).unwrap();
        assert_eq!(t.rows.len(), 3);
        for r in &t.rows {
            assert!((r[3] - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn rows_are_sorted_and_empty_grid_is_empty() {
        let t = sweep(&args(&["--n-tlm", "2,1", "--nbar", "3,1", "--law", "fock"]), &Engine::new()).unwrap();
        let keys: Vec<(f64, f64)> = t.rows.iter().map(|r| (r[0], r[1])).collect();
        assert_eq!(keys, [(1.0, 1.0), (1.0, 3.0), (2.0, 1.0), (2.0, 3.0)]);
        let t = sweep(&args(&["--nbar", ""]), &Engine::new()).unwrap();
        assert!(t.rows.is_empty());
    }
}
