//! Command-line front end for the regime-switching jump-diffusion engine.
//!
//! Subcommands wrap the library workflows one-to-one:
//!
//! * `quantile`  — tail quantile of `S_T` and the unhedged value-at-risk;
//! * `price`     — European put price by transform inversion;
//! * `hedge`     — budget-constrained VaR-minimizing put hedge;
//! * `frontier`  — efficient frontier `C ↦ VaR*` over a budget grid;
//! * `misspec`   — GBM-misspecification experiment (σ̂, β, both hedges);
//! * `simulate`  — seeded Monte Carlo quantile/VaR cross-check.
//!
//! Models are JSON documents (see `--help` of any subcommand); the
//! risk-neutral model defaults to the trivial measure change of the
//! historical model at `--rate` when `--q-model` is absent.  Results are
//! emitted as CSV (default) or JSON, to standard output or atomically to
//! `--out` (write-then-rename, so a failed run never leaves a partial
//! file).  Exit codes form a stable contract: 0 success, 2 input error,
//! 3 numerical failure, 4 infeasible program.
//!
//! All randomness flows from `--seed` (default 0, never entropy); repeated
//! runs with the same seed are byte-identical.  CSV numbers carry 12
//! significant digits unless `--table-format` selects the 4-decimal
//! presentation used by the reference tables.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use rsjd::hedge::{efficient_frontier, solve_hedge, Boundary, HedgeSolution};
use rsjd::misspec::{run_misspec, GridSpec, PremiumSource};
use rsjd::model::{apply_measure_change, MarketSetup, MeasureChangeSpec, RegimeModel};
use rsjd::risk::quantile;
use rsjd::simulate::{terminal_log_samples, SimConfig};
use rsjd::transform::put_price;
use rsjd::{Error, QuadratureSpec, Result};

// ---------------------------------------------------------------------------
// Argument surface
// ---------------------------------------------------------------------------

#[derive(Parser)]
#[command(
    name = "rsjd",
    version,
    about = "Quantiles, VaR, put prices, and VaR-optimal static hedges \
             under regime-switching jump-diffusion models"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tail quantile of S_T and the unhedged value-at-risk.
    Quantile(QuantileArgs),
    /// European put price under the risk-neutral model.
    Price(PriceArgs),
    /// Budget-constrained VaR-minimizing put hedge (K*, h*, VaR*, R).
    ///
    /// An infeasible program (quantile at or above the forward) still emits
    /// the unhedged figures with boundary `infeasible` and exits 4.
    Hedge(HedgeArgs),
    /// Efficient frontier: hedged VaR over an ascending budget grid.
    Frontier(FrontierArgs),
    /// Misspecification experiment: calibrate a GBM to synthetic put
    /// prices, hedge under it, and report the realized exceedance β.
    Misspec(MisspecArgs),
    /// Seeded Monte Carlo estimate of the quantile and unhedged VaR.
    Simulate(SimulateArgs),
}

#[derive(Args)]
struct PModelArgs {
    /// Historical (P-measure) model document.
    #[arg(long, value_name = "FILE")]
    model: PathBuf,
}

#[derive(Args)]
struct ModelArgs {
    /// Historical (P-measure) model document.
    #[arg(long, value_name = "FILE")]
    model: PathBuf,
    /// Risk-neutral model document; defaults to the trivial measure change
    /// of `--model` at `--rate`.
    #[arg(long, value_name = "FILE")]
    q_model: Option<PathBuf>,
}

#[derive(Args)]
struct MarketArgs {
    /// Spot price S0.
    #[arg(long)]
    s0: f64,
    /// Continuously compounded short rate r.
    #[arg(long)]
    rate: f64,
    /// Horizon T in years.
    #[arg(long)]
    horizon: f64,
}

#[derive(Args)]
struct QuadArgs {
    /// Contour offset for the inversion integrals (price integrals need
    /// nu > 1, probability integrals nu > 0).
    #[arg(long)]
    nu: Option<f64>,
}

#[derive(Args)]
struct OutputArgs {
    /// Output file; written atomically (temp file + rename).  Defaults to
    /// standard output.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Render CSV numbers with 4 decimals instead of 12 significant digits.
    #[arg(long)]
    table_format: bool,
}

#[derive(Args)]
struct SweepArgs {
    /// Sweep one parameter over a comma-separated value list, emitting one
    /// row per value.  PARAM is one of: alpha, horizon, s0, rate, budget,
    /// strike, nu, q1, q2 (q1/q2 rebuild the two-state chain generator and
    /// require the derived risk-neutral model).
    #[arg(long, num_args = 2, value_names = ["PARAM", "VALUES"])]
    sweep: Option<Vec<String>>,
}

#[derive(Args)]
struct QuantileArgs {
    #[command(flatten)]
    model: PModelArgs,
    #[command(flatten)]
    market: MarketArgs,
    /// Tail level alpha in (0, 1).
    #[arg(long)]
    alpha: f64,
    #[command(flatten)]
    quad: QuadArgs,
    #[command(flatten)]
    sweep: SweepArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct PriceArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    market: MarketArgs,
    /// Put strike K.
    #[arg(long)]
    strike: f64,
    #[command(flatten)]
    quad: QuadArgs,
    #[command(flatten)]
    sweep: SweepArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct HedgeArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    market: MarketArgs,
    /// Tail level alpha in (0, 1).
    #[arg(long)]
    alpha: f64,
    /// Hedging budget C in currency units.
    #[arg(long)]
    budget: f64,
    #[command(flatten)]
    quad: QuadArgs,
    #[command(flatten)]
    sweep: SweepArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct FrontierArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    market: MarketArgs,
    /// Tail level alpha in (0, 1).
    #[arg(long)]
    alpha: f64,
    /// Ascending comma-separated budget grid.
    #[arg(long, value_delimiter = ',', num_args = 1.., value_name = "C1,C2,...")]
    budgets: Vec<f64>,
    #[command(flatten)]
    quad: QuadArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct MisspecArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    market: MarketArgs,
    /// Tail level alpha in (0, 1).
    #[arg(long)]
    alpha: f64,
    /// Hedging budget C in currency units.
    #[arg(long)]
    budget: f64,
    /// Calibration strikes (defaults to {0.8, 0.9, 1.0, 1.1, 1.2}·S0).
    #[arg(long, value_delimiter = ',', num_args = 1.., value_name = "K1,K2,...")]
    grid_strikes: Option<Vec<f64>>,
    /// Calibration maturities (defaults to the horizon).
    #[arg(long, value_delimiter = ',', num_args = 1.., value_name = "T1,T2,...")]
    grid_maturities: Option<Vec<f64>>,
    /// Premium the misspecified hedger actually pays.
    #[arg(long, value_enum, default_value_t = PremiumArg::TrueModel)]
    premium: PremiumArg,
    #[command(flatten)]
    quad: QuadArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    model: PModelArgs,
    #[command(flatten)]
    market: MarketArgs,
    /// Tail level alpha in (0, 1).
    #[arg(long)]
    alpha: f64,
    /// Number of simulated paths.
    #[arg(long, default_value_t = 100_000)]
    paths: usize,
    /// RNG seed (default 0; runs are reproducible, never seeded from
    /// entropy).
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Pair each path with its Brownian mirror (requires an even path
    /// count).
    #[arg(long)]
    antithetic: bool,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PremiumArg {
    /// True-model premium at the GBM-optimal strike (what the market
    /// charges).
    TrueModel,
    /// The hedger's own Black–Scholes quote at the calibrated volatility.
    HedgerQuote,
}

impl From<PremiumArg> for PremiumSource {
    fn from(p: PremiumArg) -> Self {
        match p {
            PremiumArg::TrueModel => PremiumSource::TrueModel,
            PremiumArg::HedgerQuote => PremiumSource::HedgerQuote,
        }
    }
}

// ---------------------------------------------------------------------------
// Number and table rendering
// ---------------------------------------------------------------------------

/// One output cell: numbers honor the precision flags, text passes through.
#[derive(Clone)]
enum Cell {
    Num(f64),
    Int(u64),
    Text(String),
    Missing,
}

impl Cell {
    fn to_json(&self) -> serde_json::Value {
        match self {
            Cell::Num(x) => serde_json::Number::from_f64(*x)
                .map(serde_json::Value::Number)
                .unwrap_or(serde_json::Value::Null),
            Cell::Int(n) => serde_json::Value::from(*n),
            Cell::Text(s) => serde_json::Value::from(s.as_str()),
            Cell::Missing => serde_json::Value::Null,
        }
    }

    fn to_csv(&self, table_format: bool) -> String {
        match self {
            Cell::Num(x) => fmt_num(*x, table_format),
            Cell::Int(n) => n.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Missing => String::new(),
        }
    }
}

/// `%g`-style rendering to `sig` significant digits: plain decimal notation
/// in a moderate exponent window, scientific outside it, trailing zeros
/// trimmed in both.
fn format_sig(x: f64, sig: usize) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let exp = x.abs().log10().floor() as i32;
    if (-4..sig as i32).contains(&exp) {
        let decimals = (sig as i32 - 1 - exp).max(0) as usize;
        trim_trailing_zeros(format!("{x:.decimals$}"))
    } else {
        let mantissa_digits = sig - 1;
        let s = format!("{x:.mantissa_digits$e}");
        let (mantissa, exponent) = s.split_once('e').expect("scientific format");
        format!("{}e{}", trim_trailing_zeros(mantissa.to_string()), exponent)
    }
}

fn trim_trailing_zeros(mut s: String) -> String {
    if s.contains('.') {
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.pop();
        }
    }
    s
}

fn fmt_num(x: f64, table_format: bool) -> String {
    if table_format {
        format!("{x:.4}")
    } else {
        format_sig(x, 12)
    }
}

/// Column-labelled result set; renders as CSV rows or JSON objects.
struct Table {
    header: Vec<&'static str>,
    rows: Vec<Vec<Cell>>,
}

impl Table {
    fn render_csv(&self, table_format: bool) -> String {
        let mut text = self.header.join(",");
        text.push('\n');
        for row in &self.rows {
            debug_assert_eq!(row.len(), self.header.len());
            let rendered: Vec<String> = row.iter().map(|c| c.to_csv(table_format)).collect();
            text.push_str(&rendered.join(","));
            text.push('\n');
        }
        text
    }

    fn rows_as_json(&self) -> Vec<serde_json::Value> {
        self.rows
            .iter()
            .map(|row| {
                let map: serde_json::Map<String, serde_json::Value> = self
                    .header
                    .iter()
                    .zip(row)
                    .map(|(name, cell)| (name.to_string(), cell.to_json()))
                    .collect();
                serde_json::Value::Object(map)
            })
            .collect()
    }

    /// JSON rendering: a single row becomes one object, several rows an
    /// array of objects.
    fn render_json(&self) -> String {
        let rows = self.rows_as_json();
        let value = if rows.len() == 1 {
            rows.into_iter().next().expect("one row")
        } else {
            serde_json::Value::Array(rows)
        };
        let mut text = serde_json::to_string_pretty(&value).expect("serializable");
        text.push('\n');
        text
    }
}

fn render(table: &Table, output: &OutputArgs) -> String {
    match output.format {
        Format::Csv => table.render_csv(output.table_format),
        Format::Json => table.render_json(),
    }
}

/// Writes atomically via a sibling temp file so interrupted runs never
/// leave a partial document behind.
fn write_output(text: &str, output: &OutputArgs) -> Result<()> {
    match &output.out {
        None => {
            print!("{text}");
            Ok(())
        }
        Some(path) => {
            let dir = match path.parent() {
                Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
                _ => PathBuf::from("."),
            };
            let mut tmp = tempfile::NamedTempFile::new_in(&dir)
                .map_err(|e| Error::arg(format!("cannot create temp file in {}: {e}", dir.display())))?;
            tmp.write_all(text.as_bytes())
                .map_err(|e| Error::arg(format!("cannot write {}: {e}", path.display())))?;
            tmp.persist(path)
                .map_err(|e| Error::arg(format!("cannot rename into {}: {e}", path.display())))?;
            Ok(())
        }
    }
}

// ---------------------------------------------------------------------------
// Model loading and sweep plumbing
// ---------------------------------------------------------------------------

fn read_document(path: &Path) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::arg(format!("cannot read {}: {e}", path.display())))
}

fn quad_spec(args: &QuadArgs, nu_override: Option<f64>) -> QuadratureSpec {
    let mut spec = QuadratureSpec::default();
    if let Some(nu) = nu_override.or(args.nu) {
        spec.price_nu = nu;
        spec.prob_nu = nu;
    }
    spec
}

/// One sweep point: the parameter name and value to impose, if any.
#[derive(Clone, Copy)]
struct Override<'a> {
    param: &'a str,
    value: f64,
}

fn parse_sweep(args: &SweepArgs) -> Result<Option<(String, Vec<f64>)>> {
    let Some(raw) = &args.sweep else {
        return Ok(None);
    };
    let param = raw[0].to_ascii_lowercase();
    let values: Vec<f64> = raw[1]
        .split(',')
        .map(|tok| {
            tok.trim()
                .parse::<f64>()
                .map_err(|_| Error::arg(format!("sweep value `{tok}` is not a number")))
        })
        .collect::<Result<_>>()?;
    if values.is_empty() {
        return Err(Error::arg("sweep value list is empty"));
    }
    Ok(Some((param, values)))
}

/// Applies an override to the scalar run inputs; chain-rate overrides are
/// handled by [`resolve_models`] because they rebuild the model.
fn apply_scalar_override(
    ov: Override<'_>,
    setup: &mut MarketSetup,
    strike: Option<&mut f64>,
    nu: &mut Option<f64>,
    allowed: &[&str],
) -> Result<()> {
    if !allowed.contains(&ov.param) {
        return Err(Error::arg(format!(
            "sweep parameter `{}` is not valid here (expected one of: {})",
            ov.param,
            allowed.join(", ")
        )));
    }
    match ov.param {
        "alpha" => setup.confidence = ov.value,
        "horizon" => setup.horizon = ov.value,
        "s0" => setup.spot = ov.value,
        "rate" => setup.rate = ov.value,
        "budget" => setup.budget = ov.value,
        "strike" => {
            *strike.expect("strike sweep only offered by the price command") = ov.value
        }
        "nu" => *nu = Some(ov.value),
        "q1" | "q2" => {} // applied during model resolution
        other => unreachable!("unvetted sweep parameter {other}"),
    }
    Ok(())
}

/// Sets one off-diagonal rate of a two-state chain generator.
fn set_chain_rate(model: &mut RegimeModel, param: &str, value: f64) -> Result<()> {
    if model.state_count() != 2 {
        return Err(Error::arg(format!(
            "sweep parameter `{param}` requires a two-state model, got {} states",
            model.state_count()
        )));
    }
    if !(value >= 0.0) || !value.is_finite() {
        return Err(Error::arg(format!(
            "chain rate `{param}` must be non-negative, got {value}"
        )));
    }
    let row = if param == "q1" { 0 } else { 1 };
    model.generator[(row, 1 - row)] = value;
    model.generator[(row, row)] = -value;
    Ok(())
}

/// Loads the historical model, applying a chain-rate override if requested.
fn resolve_p_model(text: &str, ov: Option<Override<'_>>) -> Result<RegimeModel> {
    let mut p = rsjd::json::parse_model(text)?;
    if let Some(o) = ov {
        if o.param == "q1" || o.param == "q2" {
            set_chain_rate(&mut p, o.param, o.value)?;
        }
    }
    p.ensure_valid()?;
    Ok(p)
}

/// Loads or derives the risk-neutral model.  With no `--q-model` the
/// trivial measure change of the historical model at `rate` is used; an
/// explicit document is incompatible with chain-rate sweeps, which rebuild
/// the historical chain.
fn resolve_q_model(
    q_text: Option<&str>,
    p_model: &RegimeModel,
    rate: f64,
    ov: Option<Override<'_>>,
) -> Result<RegimeModel> {
    match q_text {
        Some(text) => {
            if let Some(o) = ov {
                if o.param == "q1" || o.param == "q2" {
                    return Err(Error::arg(
                        "chain-rate sweeps require the derived risk-neutral model; \
                         drop --q-model",
                    ));
                }
            }
            let q = rsjd::json::parse_model(text)?;
            q.ensure_valid()?;
            q.require_risk_neutral("--q-model")?;
            Ok(q)
        }
        None => apply_measure_change(p_model, &MeasureChangeSpec::identity(p_model), rate),
    }
}

// ---------------------------------------------------------------------------
// Command runners
// ---------------------------------------------------------------------------

fn hedge_cells(sol: &HedgeSolution) -> Vec<Cell> {
    let boundary = match sol.boundary {
        Boundary::Interior => "interior",
        Boundary::FractionCapped => "fraction-capped",
        Boundary::Infeasible => "infeasible",
    };
    vec![
        sol.strike.map_or(Cell::Missing, Cell::Num),
        Cell::Num(sol.fraction),
        Cell::Num(sol.hedged_var),
        Cell::Num(sol.reduction),
        Cell::Text(boundary.to_string()),
        Cell::Num(sol.quantile),
        Cell::Num(sol.unhedged_var),
        sol.put0.map_or(Cell::Missing, Cell::Num),
    ]
}

const HEDGE_HEADER: [&str; 8] = [
    "strike",
    "fraction",
    "var_hedged",
    "reduction",
    "boundary",
    "quantile",
    "var_unhedged",
    "put0",
];

/// Runs a scalar-output command once per sweep value (or once without a
/// sweep), prepending the swept parameter as the leading column.
fn run_swept(
    sweep: &SweepArgs,
    allowed: &[&str],
    header: &[&'static str],
    mut one: impl FnMut(Option<Override<'_>>) -> Result<Vec<Cell>>,
) -> Result<Table> {
    let parsed = parse_sweep(sweep)?;
    match parsed {
        None => Ok(Table {
            header: header.to_vec(),
            rows: vec![one(None)?],
        }),
        Some((param, values)) => {
            if !allowed.contains(&param.as_str()) {
                return Err(Error::arg(format!(
                    "sweep parameter `{param}` is not valid here (expected one of: {})",
                    allowed.join(", ")
                )));
            }
            let mut full_header: Vec<&'static str> = vec!["sweep_value"];
            full_header.extend_from_slice(header);
            let mut rows = Vec::with_capacity(values.len());
            for &value in &values {
                let ov = Override {
                    param: &param,
                    value,
                };
                let mut row = vec![Cell::Num(value)];
                row.extend(one(Some(ov))?);
                rows.push(row);
            }
            Ok(Table {
                header: full_header,
                rows,
            })
        }
    }
}

fn cmd_quantile(args: &QuantileArgs) -> Result<(Table, u8)> {
    let text = read_document(&args.model.model)?;
    let allowed = ["alpha", "horizon", "s0", "rate", "nu", "q1", "q2"];
    let table = run_swept(
        &args.sweep,
        &allowed,
        &["alpha", "quantile", "var_unhedged"],
        |ov| {
            let mut setup = MarketSetup {
                spot: args.market.s0,
                rate: args.market.rate,
                horizon: args.market.horizon,
                confidence: args.alpha,
                budget: 0.0,
            };
            let mut nu = None;
            if let Some(o) = ov {
                apply_scalar_override(o, &mut setup, None, &mut nu, &allowed)?;
            }
            setup.ensure_valid()?;
            let p = resolve_p_model(&text, ov)?;
            let quad = quad_spec(&args.quad, nu);
            let q = quantile(setup.confidence, setup.horizon, &p, setup.spot, &quad)?;
            let var = setup.spot - setup.discount() * q;
            Ok(vec![
                Cell::Num(setup.confidence),
                Cell::Num(q),
                Cell::Num(var),
            ])
        },
    )?;
    Ok((table, 0))
}

fn cmd_price(args: &PriceArgs) -> Result<(Table, u8)> {
    let p_text = read_document(&args.model.model)?;
    let q_text = args
        .model
        .q_model
        .as_deref()
        .map(read_document)
        .transpose()?;
    let allowed = ["strike", "horizon", "s0", "rate", "nu", "q1", "q2"];
    let table = run_swept(
        &args.sweep,
        &allowed,
        &["strike", "put_price"],
        |ov| {
            let mut setup = MarketSetup {
                spot: args.market.s0,
                rate: args.market.rate,
                horizon: args.market.horizon,
                confidence: 0.5, // unused by pricing; kept in-domain
                budget: 0.0,
            };
            let mut strike = args.strike;
            let mut nu = None;
            if let Some(o) = ov {
                apply_scalar_override(o, &mut setup, Some(&mut strike), &mut nu, &allowed)?;
            }
            setup.ensure_valid()?;
            // A risk-neutral document supplied as --model prices directly;
            // a historical one is mapped through the trivial measure change.
            let parsed = rsjd::json::parse_model(&p_text)?;
            let q_model = match (&q_text, parsed.rate()) {
                (Some(text), _) => resolve_q_model(Some(text), &parsed, setup.rate, ov)?,
                (None, Some(_)) => {
                    if let Some(o) = ov {
                        if o.param == "q1" || o.param == "q2" {
                            return Err(Error::arg(
                                "chain-rate sweeps need a historical --model document",
                            ));
                        }
                    }
                    parsed.ensure_valid()?;
                    parsed
                }
                (None, None) => {
                    let p = resolve_p_model(&p_text, ov)?;
                    resolve_q_model(None, &p, setup.rate, ov)?
                }
            };
            let quad = quad_spec(&args.quad, nu);
            let price = put_price(strike, setup.horizon, &q_model, setup.spot, &quad)?;
            Ok(vec![Cell::Num(strike), Cell::Num(price)])
        },
    )?;
    Ok((table, 0))
}

fn cmd_hedge(args: &HedgeArgs) -> Result<(Table, u8)> {
    let p_text = read_document(&args.model.model)?;
    let q_text = args
        .model
        .q_model
        .as_deref()
        .map(read_document)
        .transpose()?;
    let allowed = [
        "alpha", "horizon", "s0", "rate", "budget", "nu", "q1", "q2",
    ];
    let mut any_infeasible = false;
    let table = run_swept(&args.sweep, &allowed, &HEDGE_HEADER, |ov| {
        let mut setup = MarketSetup {
            spot: args.market.s0,
            rate: args.market.rate,
            horizon: args.market.horizon,
            confidence: args.alpha,
            budget: args.budget,
        };
        let mut nu = None;
        if let Some(o) = ov {
            apply_scalar_override(o, &mut setup, None, &mut nu, &allowed)?;
        }
        let p = resolve_p_model(&p_text, ov)?;
        let q = resolve_q_model(q_text.as_deref(), &p, setup.rate, ov)?;
        let quad = quad_spec(&args.quad, nu);
        let sol = solve_hedge(&setup, &p, &q, &quad)?;
        if sol.boundary == Boundary::Infeasible {
            any_infeasible = true;
            eprintln!(
                "hedge infeasible: quantile {} is not below the forward {}; \
                 reporting unhedged figures",
                sol.quantile,
                setup.forward()
            );
        }
        Ok(hedge_cells(&sol))
    })?;
    Ok((table, if any_infeasible { 4 } else { 0 }))
}

fn cmd_frontier(args: &FrontierArgs) -> Result<(Table, u8)> {
    let p_text = read_document(&args.model.model)?;
    let q_text = args
        .model
        .q_model
        .as_deref()
        .map(read_document)
        .transpose()?;
    let setup = MarketSetup {
        spot: args.market.s0,
        rate: args.market.rate,
        horizon: args.market.horizon,
        confidence: args.alpha,
        budget: 0.0,
    };
    let p = resolve_p_model(&p_text, None)?;
    let q = resolve_q_model(q_text.as_deref(), &p, setup.rate, None)?;
    let quad = quad_spec(&args.quad, None);
    let (points, line) = efficient_frontier(&setup, &p, &q, &args.budgets, &quad)?;
    let rows = points
        .iter()
        .map(|pt| {
            vec![
                Cell::Num(pt.budget),
                Cell::Num(pt.hedged_var),
                Cell::Num(pt.fraction),
                Cell::Num(line.intercept),
                Cell::Num(line.slope),
            ]
        })
        .collect();
    Ok((
        Table {
            header: vec!["budget", "var_hedged", "fraction", "intercept", "slope"],
            rows,
        },
        0,
    ))
}

fn cmd_misspec(args: &MisspecArgs) -> Result<(Table, u8)> {
    let p_text = read_document(&args.model.model)?;
    let q_text = args
        .model
        .q_model
        .as_deref()
        .map(read_document)
        .transpose()?;
    let setup = MarketSetup {
        spot: args.market.s0,
        rate: args.market.rate,
        horizon: args.market.horizon,
        confidence: args.alpha,
        budget: args.budget,
    };
    let p = resolve_p_model(&p_text, None)?;
    let q = resolve_q_model(q_text.as_deref(), &p, setup.rate, None)?;
    let grid = match (&args.grid_strikes, &args.grid_maturities) {
        (None, None) => GridSpec::for_horizon(setup.spot, setup.horizon),
        (strikes, maturities) => GridSpec {
            strikes: strikes
                .clone()
                .unwrap_or_else(|| GridSpec::for_horizon(setup.spot, setup.horizon).strikes),
            maturities: maturities.clone().unwrap_or(vec![setup.horizon]),
        },
    };
    let quad = quad_spec(&args.quad, None);
    let report = run_misspec(&p, &q, &setup, &grid, args.premium.into(), &quad)?;
    let mut row = vec![
        Cell::Num(report.sigma_hat),
        Cell::Num(report.mu_hat),
        Cell::Num(report.beta),
    ];
    row.extend(hedge_cells(&report.gbm_strategy).into_iter().take(4));
    row.extend(hedge_cells(&report.true_strategy).into_iter().take(4));
    Ok((
        Table {
            header: vec![
                "sigma_hat",
                "mu_hat",
                "beta",
                "gbm_strike",
                "gbm_fraction",
                "gbm_var",
                "gbm_reduction",
                "true_strike",
                "true_fraction",
                "true_var",
                "true_reduction",
            ],
            rows: vec![row],
        },
        0,
    ))
}

fn cmd_simulate(args: &SimulateArgs) -> Result<(Table, u8)> {
    let text = read_document(&args.model.model)?;
    let p = resolve_p_model(&text, None)?;
    let setup = MarketSetup {
        spot: args.market.s0,
        rate: args.market.rate,
        horizon: args.market.horizon,
        confidence: args.alpha,
        budget: 0.0,
    };
    setup.ensure_valid()?;
    let cfg = SimConfig {
        paths: args.paths,
        seed: args.seed,
        antithetic: args.antithetic,
    };
    let mut samples = terminal_log_samples(&p, setup.horizon, &cfg)?;
    samples.sort_by(|a, b| a.partial_cmp(b).expect("finite samples"));
    // Empirical lower quantile: the smallest sample with F̂ >= alpha.
    let rank = ((setup.confidence * samples.len() as f64).ceil() as usize)
        .clamp(1, samples.len());
    let q_mc = setup.spot * samples[rank - 1].exp();
    let var_mc = setup.spot - setup.discount() * q_mc;
    Ok((
        Table {
            header: vec!["alpha", "quantile", "var_unhedged", "paths", "seed"],
            rows: vec![vec![
                Cell::Num(setup.confidence),
                Cell::Num(q_mc),
                Cell::Num(var_mc),
                Cell::Int(args.paths as u64),
                Cell::Int(args.seed),
            ]],
        },
        0,
    ))
}

// ---------------------------------------------------------------------------
// Entry point
// ---------------------------------------------------------------------------

/// Stable exit-code contract: 2 input error, 3 numerical failure,
/// 4 infeasible program.
fn exit_code(err: &Error) -> u8 {
    match err {
        Error::InvalidModel(_)
        | Error::Document { .. }
        | Error::ExpectedHistorical { .. }
        | Error::ExpectedRiskNeutral { .. }
        | Error::Dimension(_)
        | Error::InvalidContour { .. }
        | Error::InvalidArgument(_) => 2,
        Error::QuadratureNonConvergence { .. }
        | Error::MatrixExpOverflow
        | Error::NonFiniteCharfun { .. }
        | Error::BracketFailure(_)
        | Error::RootNoConvergence(_)
        | Error::ProbabilityOutOfRange { .. }
        | Error::Calibration(_) => 3,
        Error::Infeasible { .. }
        | Error::BudgetTooLarge { .. }
        | Error::TargetUnattainable { .. }
        | Error::NotInterior { .. } => 4,
    }
}

fn run(cli: &Cli) -> Result<u8> {
    let (table, extra_code, output) = match &cli.command {
        Command::Quantile(a) => {
            let (t, c) = cmd_quantile(a)?;
            (t, c, &a.output)
        }
        Command::Price(a) => {
            let (t, c) = cmd_price(a)?;
            (t, c, &a.output)
        }
        Command::Hedge(a) => {
            let (t, c) = cmd_hedge(a)?;
            (t, c, &a.output)
        }
        Command::Frontier(a) => {
            let (t, c) = cmd_frontier(a)?;
            (t, c, &a.output)
        }
        Command::Misspec(a) => {
            let (t, c) = cmd_misspec(a)?;
            (t, c, &a.output)
        }
        Command::Simulate(a) => {
            let (t, c) = cmd_simulate(a)?;
            (t, c, &a.output)
        }
    };
    let text = render(&table, output);
    write_output(&text, output)?;
    Ok(extra_code)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}
