use halasz_core::characters::{parse_character, CharGroup};
use halasz_core::dirichlet::{repulsion_check, EvalOptions, GridInfo, GridOptions, DEFAULT_POINT_BUDGET};
use halasz_core::halasz::{
    ap_report, exceptional_sets, halasz_report, lipschitz_report, pls_report, short_interval_report, Mode,
};
use halasz_core::perron::{
    verify_shifted_identity, meansquare_check, prime_weights, verify_split_identity, ShiftedOptions, SplitOptions,
};
use halasz_core::primes::{exceptional_condition, fi_estimate, hoheisel_report, linnik_search, psi_chi};
use halasz_core::report::Provenance;
use halasz_core::sieve::{partial_sum, parse_real, sieve_function, FunctionSpec, PrimeTables};
use halasz_core::{LabError, Result};
use serde::Serialize;
use serde_json::{json, Value};

use crate::examples::{amplitude_fit, selberg_delange};
use crate::{Cli, Command, ExampleWhich, Opts, PerronWhich};

pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(header: &[&str]) -> Self {
        Table { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    fn push<I: IntoIterator<Item = String>>(&mut self, row: I) {
        self.rows.push(row.into_iter().collect());
    }
}

pub struct Output {
    pub command: String,
    pub body: Value,
    pub table: Option<Table>,
    pub provenance: Provenance,
}

struct Ctx<'a> {
    o: &'a Opts,
    budget: u64,
}

fn missing(flag: &str) -> LabError {
    LabError::domain(format!("--{flag} is required"))
}

/// Replaces a bare `random_pm1` by `random_pm1(<seed>)`.
fn substitute_seed(text: &str, seed: Option<u64>) -> Result<String> {
    const NAME: &str = "random_pm1";
    let mut out = String::new();
    let mut rest = text;
    while let Some(i) = rest.find(NAME) {
        out.push_str(&rest[..i + NAME.len()]);
        rest = &rest[i + NAME.len()..];
        if !rest.trim_start().starts_with('(') {
            let s = seed.ok_or_else(|| LabError::domain("random_pm1 needs a seed: pass --seed or random_pm1(<seed>)"))?;
            out.push_str(&format!("({s})"));
        }
    }
    out.push_str(rest);
    Ok(out)
}

fn list(text: &str) -> Result<Vec<f64>> {
    text.split(',').filter(|s| !s.trim().is_empty()).map(parse_real).collect()
}

fn c2(v: num_complex::Complex64) -> String {
    if v.im == 0.0 {
        v.re.to_string()
    } else {
        format!("{}{:+}i", v.re, v.im)
    }
}

impl<'a> Ctx<'a> {
    fn spec(&self) -> Result<FunctionSpec> {
        self.spec_or(None)
    }

    fn spec_or(&self, default: Option<&str>) -> Result<FunctionSpec> {
        let text = self.o.spec.as_deref().or(default).ok_or_else(|| missing("spec"))?;
        substitute_seed(text, self.o.seed)?.parse()
    }

    fn x(&self) -> Result<f64> {
        self.o.x.ok_or_else(|| missing("x"))
    }

    fn q(&self) -> Result<u64> {
        self.o.q.ok_or_else(|| missing("q"))
    }

    fn a(&self) -> Result<u64> {
        self.o.a.ok_or_else(|| missing("a"))
    }

    fn eval(&self) -> EvalOptions {
        EvalOptions { p_max: self.o.pmax, grid: GridOptions { budget: self.budget, ..Default::default() } }
    }

    /// Prime tables covering `needed`, honouring an explicit --limit.
    fn tables(&self, needed: f64) -> Result<PrimeTables> {
        let needed = needed.max(2.0).ceil() as u64;
        let n = match self.o.limit {
            Some(limit) => {
                if limit < needed {
                    return Err(LabError::Range { what: "sieve limit N", value: needed as f64, limit: limit as f64 });
                }
                limit
            }
            None => needed,
        };
        if let Some(p) = self.o.pmax {
            if p > n {
                return Err(LabError::domain(format!("P_max = {p} exceeds the sieve limit N = {n}")));
            }
        }
        PrimeTables::build(n)
    }

    /// Tables for an evaluation of F at scale x: they must reach x and P_max.
    fn tables_for_series(&self, x: f64, extra: f64) -> Result<PrimeTables> {
        let p_max = self.eval().p_max_for(x) as f64;
        self.tables(p_max.max(extra))
    }

    fn provenance(&self, tables: &PrimeTables, p_max: u64, grid: Option<GridInfo>) -> Provenance {
        Provenance::new(tables.limit(), p_max, self.budget).with_grid(grid).with_seed(self.o.seed)
    }
}

fn out<T: Serialize>(command: &str, body: &T, table: Option<Table>, provenance: Provenance) -> Result<Output> {
    let body = serde_json::to_value(body).map_err(|e| LabError::Consistency(e.to_string()))?;
    Ok(Output { command: command.to_string(), body, table, provenance })
}

pub fn run(cli: &Cli) -> Result<Output> {
    let ctx = Ctx { o: &cli.opts, budget: cli.opts.budget.unwrap_or(DEFAULT_POINT_BUDGET) };
    let o = &cli.opts;
    match &cli.command {
        Command::Meanvalue => {
            let spec = ctx.spec()?;
            let x = ctx.x()?;
            let tables = ctx.tables(x)?;
            let sf = sieve_function(&spec, &tables, x.max(1.0).floor() as u64)?;
            let sum = partial_sum(&sf, x)?;
            let body = json!({ "spec": spec.to_string(), "x": x, "sum": sum, "mean": sum / x });
            out("meanvalue", &body, None, ctx.provenance(&tables, tables.limit(), None))
        }
        Command::Halasz => {
            let spec = ctx.spec()?;
            let x = ctx.x()?;
            let mode: Mode = o.mode.as_deref().unwrap_or("simple").parse()?;
            let tables = ctx.tables_for_series(x, x)?;
            let sf = sieve_function(&spec, &tables, x.floor() as u64)?;
            let r = halasz_report(&sf, &tables, x, mode, &ctx.eval())?;
            let grid = r.components.maximizer.map(|m| m.grid);
            out("halasz", &r, None, ctx.provenance(&tables, r.params.p_max, grid))
        }
        Command::ShortInterval => {
            let spec = ctx.spec()?;
            let x = ctx.x()?;
            let delta = o.delta.ok_or_else(|| missing("delta"))?;
            let end = x + x.powf(1.0 - delta);
            let tables = ctx.tables_for_series(x, end)?;
            let sf = sieve_function(&spec, &tables, end.floor() as u64)?;
            let r = short_interval_report(&sf, &tables, x, delta, &ctx.eval())?;
            let grid = r.components.maximizer.map(|m| m.grid);
            out("short-interval", &r, None, ctx.provenance(&tables, r.params.p_max, grid))
        }
        Command::Ap => {
            let spec = ctx.spec()?;
            let (x, q, a) = (ctx.x()?, ctx.q()?, ctx.a()?);
            let tables = ctx.tables_for_series(x, x)?;
            let sf = sieve_function(&spec, &tables, x.floor() as u64)?;
            let r = ap_report(&sf, &tables, x, q, a, &ctx.eval())?;
            let grid = r.components.maximizer.map(|m| m.grid);
            out("ap", &r, None, ctx.provenance(&tables, r.params.p_max, grid))
        }
        Command::Lipschitz => {
            let spec = ctx.spec()?;
            let x = ctx.x()?;
            let w = o.w.ok_or_else(|| missing("w"))?;
            let tables = ctx.tables_for_series(x, x)?;
            let sf = sieve_function(&spec, &tables, x.floor() as u64)?;
            let r = lipschitz_report(&sf, &tables, x, w, &ctx.eval())?;
            out("lipschitz", &r, None, ctx.provenance(&tables, r.maximizer.p_max, Some(r.maximizer.grid)))
        }
        Command::ExceptionalSets => {
            let spec = ctx.spec()?;
            let (x, q) = (ctx.x()?, ctx.q()?);
            let j = o.j.unwrap_or(1);
            let tables = ctx.tables_for_series(x, x)?;
            let sf = sieve_function(&spec, &tables, x.floor() as u64)?;
            let r = exceptional_sets(&sf, &tables, q, x, j, &ctx.eval())?;
            let mut t = Table::new(&["set", "rank", "character", "index", "score"]);
            for (name, ranking) in [("1", &r.ranking1), ("2", &r.ranking2), ("3", &r.ranking3)] {
                for (i, c) in ranking.iter().enumerate() {
                    t.push([name.to_string(), (i + 1).to_string(), c.character.clone(), c.index.to_string(), c.score.to_string()]);
                }
            }
            out("exceptional-sets", &r, Some(t), ctx.provenance(&tables, r.p_max, None))
        }
        Command::Pls => {
            let spec = ctx.spec()?;
            let (x, q) = (ctx.x()?, ctx.q()?);
            let j = o.j.unwrap_or(1);
            let tables = ctx.tables_for_series(x, x)?;
            let sf = sieve_function(&spec, &tables, x.floor() as u64)?;
            let r = pls_report(&sf, &tables, q, x, j, &ctx.eval())?;
            out("pls", &r, None, ctx.provenance(&tables, ctx.eval().p_max_for(x), None))
        }
        Command::Hoheisel => {
            let x = ctx.x()?;
            let delta = o.delta.unwrap_or(0.2);
            let windows = o.windows.unwrap_or(20);
            let end = x + windows as f64 * x.powf(1.0 - delta);
            let tables = ctx.tables(end)?;
            let r = hoheisel_report(&tables, x, delta, windows)?;
            let (header, rows) = r.csv_rows();
            let t = Table { header: header.iter().map(|s| s.to_string()).collect(), rows };
            out("hoheisel", &r, Some(t), ctx.provenance(&tables, tables.limit(), None))
        }
        Command::PsiChi => {
            let (x, q) = (ctx.x()?, ctx.q()?);
            let tables = ctx.tables(x)?;
            let chars = match &o.character {
                Some(text) => vec![parse_character(text, Some(q))?],
                None => CharGroup::new(q)?.characters(),
            };
            #[derive(Serialize)]
            struct Row {
                character: String,
                index: u64,
                psi: num_complex::Complex64,
            }
            let rows: Vec<Row> = chars
                .iter()
                .map(|c| Ok(Row { character: c.to_string(), index: c.index(), psi: psi_chi(&tables, c, x)? }))
                .collect::<Result<_>>()?;
            let mut t = Table::new(&["character", "index", "psi_re", "psi_im"]);
            for r in &rows {
                t.push([r.character.clone(), r.index.to_string(), r.psi.re.to_string(), r.psi.im.to_string()]);
            }
            let body = json!({ "q": q, "x": x, "characters": rows });
            out("psi-chi", &body, Some(t), ctx.provenance(&tables, tables.limit(), None))
        }
        Command::ExceptionalCondition => {
            let (x, q) = (ctx.x()?, ctx.q()?);
            let tables = ctx.tables(x)?;
            let r = exceptional_condition(&tables, q, x)?;
            let mut t = Table::new(&["character", "index", "sum", "threshold_c0", "threshold_c5"]);
            for s in &r.sums {
                t.push([
                    s.character.clone(),
                    s.index.to_string(),
                    s.score.to_string(),
                    r.threshold_c0.to_string(),
                    r.threshold_c5.to_string(),
                ]);
            }
            out("exceptional-condition", &r, Some(t), ctx.provenance(&tables, tables.limit(), None))
        }
        Command::Linnik => {
            let cap = o.cap.unwrap_or(1_000_000);
            let moduli: Vec<u64> = match (o.qmax, o.q) {
                (Some(m), _) => (1..=m).collect(),
                (None, Some(q)) => vec![q],
                (None, None) => return Err(missing("q or --qmax")),
            };
            let tables = ctx.tables(cap as f64)?;
            let reports = moduli.iter().map(|&q| linnik_search(&tables, q, cap)).collect::<Result<Vec<_>>>()?;
            let mut t = Table::new(&["q", "a", "least_prime"]);
            for r in &reports {
                for l in &r.least {
                    t.push([r.q.to_string(), l.a.to_string(), l.prime.map_or(String::new(), |p| p.to_string())]);
                }
            }
            let worst = reports
                .iter()
                .filter_map(|r| r.max_exponent.map(|e| (r.q, e)))
                .fold(None, |b: Option<(u64, f64)>, c| if b.map_or(true, |b| c.1 > b.1) { Some(c) } else { b });
            #[derive(Serialize)]
            struct Summary<'a> {
                q: u64,
                max_exponent: Option<f64>,
                all_found: bool,
                least: &'a [halasz_core::primes::LeastPrime],
            }
            let summaries: Vec<Summary> = reports
                .iter()
                .map(|r| Summary { q: r.q, max_exponent: r.max_exponent, all_found: r.all_found, least: &r.least })
                .collect();
            let body = json!({
                "cap": cap,
                "moduli": summaries,
                "all_found": reports.iter().all(|r| r.all_found),
                "max_exponent": worst.map(|w| w.1),
                "worst_modulus": worst.map(|w| w.0),
            });
            out("linnik", &body, Some(t), ctx.provenance(&tables, tables.limit(), None))
        }
        Command::FiEstimate => {
            let (x, q, a) = (ctx.x()?, ctx.q()?, ctx.a()?);
            let z = o.z.unwrap_or_else(|| x.powf(0.125));
            let tables = ctx.tables(x)?;
            let chi = o.character.as_deref().map(|c| parse_character(c, Some(q))).transpose()?;
            let r = fi_estimate(&tables, q, a, x, z, chi.as_ref())?;
            out("fi-estimate", &r, None, ctx.provenance(&tables, tables.limit(), None))
        }
        Command::PerronVerify { which } => match which {
            PerronWhich::Shifted => {
                let spec = ctx.spec()?;
                let x = o.x.unwrap_or(10.5);
                let ts = list(o.t.as_deref().unwrap_or("2000"))?;
                let mut opts = ShiftedOptions::default();
                if let Some(c) = o.c {
                    opts.c = c;
                }
                if let Some(n) = o.nmax {
                    opts.n_max = n;
                }
                if let Some(a) = o.shift_cutoff {
                    opts.shift_cutoff = a;
                }
                let tables = ctx.tables(opts.n_max.max(x as u64) as f64)?;
                let r = verify_shifted_identity(&spec, &tables, x, &ts, &opts)?;
                let mut t = Table::new(&["T", "numeric", "oracle", "rel_err", "richardson"]);
                for p in &r.points {
                    t.push([p.t_max.to_string(), c2(p.numeric), c2(r.oracle), p.rel_err.to_string(), p.richardson.to_string()]);
                }
                out("perron-verify lemma22", &r, Some(t), ctx.provenance(&tables, opts.n_max, None))
            }
            PerronWhich::Split => {
                let spec = ctx.spec()?;
                let x = o.x.unwrap_or(500.5);
                let y = o.y.unwrap_or(10.0);
                let ts = list(o.t.as_deref().unwrap_or("400"))?;
                let tables = ctx.tables(x)?;
                let r = verify_split_identity(&spec, &tables, x, y, &ts, &SplitOptions::default())?;
                let mut t = Table::new(&["T", "integral", "lhs_sum", "residual", "error_budget", "ratio"]);
                for p in &r.points {
                    t.push([
                        p.t_max.to_string(),
                        c2(p.integral),
                        c2(r.lhs_sum),
                        p.residual.to_string(),
                        p.error_budget.to_string(),
                        p.ratio.to_string(),
                    ]);
                }
                out("perron-verify prop21", &r, Some(t), ctx.provenance(&tables, tables.limit(), None))
            }
            PerronWhich::Meansquare => {
                let x = o.x.unwrap_or(1e4);
                let t_max = match o.t.as_deref() {
                    Some(text) => *list(text)?.first().ok_or_else(|| missing("t"))?,
                    None => 5.0,
                };
                let tables = ctx.tables(x)?;
                let weights = prime_weights(&tables, o.weights.as_deref().unwrap_or("inv-n"), t_max, x)?;
                let r = meansquare_check(&tables, &weights, t_max, x, o.q)?;
                out("perron-verify meansquare", &r, None, ctx.provenance(&tables, tables.limit(), None))
            }
        },
        Command::Repulsion => {
            let spec = ctx.spec()?;
            let x = ctx.x()?;
            let ts = list(o.t.as_deref().ok_or_else(|| missing("t"))?)?;
            let deltas = match o.deltas.as_deref() {
                Some(d) => list(d)?,
                None => vec![0.0; ts.len()],
            };
            if deltas.len() != ts.len() {
                return Err(LabError::domain("--deltas and --t must have the same length"));
            }
            let points: Vec<(f64, f64)> = deltas.into_iter().zip(ts).collect();
            let tables = ctx.tables_for_series(x, x)?;
            let r = repulsion_check(&spec, &tables, x, &points, o.rho.unwrap_or(0.0), &ctx.eval())?;
            out("repulsion", &r, None, ctx.provenance(&tables, r.p_max, None))
        }
        Command::Examples { which } => match which {
            ExampleWhich::SelbergDelange => {
                let x = o.x.unwrap_or(1e7);
                let betas = list(o.betas.as_deref().unwrap_or("0.5,2"))?;
                let tables = ctx.tables(x)?;
                let r = selberg_delange(&tables, x, &betas)?;
                let mut t = Table::new(&["beta", "x", "sum", "normalised", "target", "ratio"]);
                for row in &r.rows {
                    t.push([
                        row.beta.to_string(),
                        row.x.to_string(),
                        row.sum.to_string(),
                        row.normalised.to_string(),
                        row.target.to_string(),
                        row.ratio.to_string(),
                    ]);
                }
                out("examples selberg-delange", &r, Some(t), ctx.provenance(&tables, tables.limit(), None))
            }
            ExampleWhich::SignCos | ExampleWhich::GPlus => {
                let (default_spec, target, name) = match which {
                    ExampleWhich::SignCos => ("sign_cos(2pi)", 2.0 / std::f64::consts::PI - 1.0, "examples sign-cos"),
                    _ => ("g_plus(2pi)", -0.5, "examples g-plus"),
                };
                let spec = ctx.spec_or(Some(default_spec))?;
                let xs = list(o.xs.as_deref().unwrap_or("1e4,1e5,1e6,1e7"))?;
                let top = xs.iter().cloned().fold(0.0, f64::max) * std::f64::consts::E;
                let tables = ctx.tables(top)?;
                let r = amplitude_fit(&spec, &tables, &xs, target)?;
                let mut t = Table::new(&["X", "log_log_X", "amplitude", "argmax"]);
                for p in &r.points {
                    t.push([p.big_x.to_string(), p.log_log_x.to_string(), p.amplitude.to_string(), p.argmax.to_string()]);
                }
                out(name, &r, Some(t), ctx.provenance(&tables, tables.limit(), None))
            }
        },
    }
}
