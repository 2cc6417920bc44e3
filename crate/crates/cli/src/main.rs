//! `datadesk`: batch access to the datadesk analysis engine.
//!
//! Results go to stdout as JSON (the same bodies the HTTP API returns), as
//! plain-text tables, or as SVG for chart-shaped results. Diagnostics go to
//! stderr. Exit status is 0 on success, 1 for usage and data errors, 2 for
//! internal failures.

mod render;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use datadesk_core::charts::{render_svg, ChartData};
use datadesk_core::table::{parse_csv, ParseOptions, Table};
use datadesk_core::timeseries::{ArimaSpec, SeriesSpec, TimeSpec};
use datadesk_service::analysis::{self, ChartKind};
use serde::de::DeserializeOwned;
use serde::Serialize;

#[derive(Parser)]
#[command(
    name = "datadesk",
    version,
    about = "Explore, chart and forecast CSV data"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Output {
    Json,
    Table,
    Svg,
}

#[derive(clap::Args)]
struct Input {
    /// CSV file to read.
    #[arg(long, short)]
    input: PathBuf,
    /// Field delimiter.
    #[arg(long, default_value_t = ',')]
    delimiter: char,
    #[arg(long, short, value_enum, default_value_t = Output::Json)]
    output: Output,
    /// SVG width and height in pixels.
    #[arg(long, default_value_t = 640)]
    width: u32,
    #[arg(long, default_value_t = 400)]
    height: u32,
}

#[derive(clap::Args)]
struct Series {
    /// Series spec as JSON or @file, e.g. {"value_col": "sales", "time": {"date_col": "month"}}.
    #[arg(long, conflicts_with_all = ["value", "date", "year", "period"])]
    series: Option<String>,
    /// Value column; defaults to the only numeric column.
    #[arg(long)]
    value: Option<String>,
    /// Date column giving the time of each row.
    #[arg(long, conflicts_with_all = ["year", "period"])]
    date: Option<String>,
    /// Year column.
    #[arg(long)]
    year: Option<String>,
    /// Month or quarter column, used with --year.
    #[arg(long, requires = "year")]
    period: Option<String>,
    /// Observations per year (1, 4 or 12).
    #[arg(long)]
    frequency: Option<u32>,
}

#[derive(Subcommand)]
enum Command {
    /// Column names, types and missing counts.
    Schema {
        #[command(flatten)]
        input: Input,
    },
    /// Five-number summary, mean and standard deviation of a numeric column.
    Summary {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        column: String,
    },
    /// Rows matching a predicate (JSON or @file).
    Filter {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        predicate: String,
    },
    /// A subset of columns, in the given order.
    Select {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_delimiter = ',', required = true)]
        columns: Vec<String>,
    },
    /// Grouped aggregation; spec as JSON or @file.
    Aggregate {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        spec: String,
    },
    /// Level counts of a column.
    Counts {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        column: String,
    },
    /// Histogram of a numeric column.
    Hist {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        column: String,
        /// Number of bins; Sturges' rule when omitted.
        #[arg(long)]
        bins: Option<usize>,
    },
    /// Chart data: histogram, bar, scatter or line.
    Plot {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_enum)]
        kind: PlotKind,
        /// One column for histogram and bar, x,y for scatter and line.
        #[arg(long, value_delimiter = ',', required = true)]
        columns: Vec<String>,
        #[arg(long)]
        bins: Option<usize>,
    },
    /// Ljung-Box statistics for lags 1..=max-lag.
    Ljungbox {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        series: Series,
        #[arg(long, default_value_t = 10)]
        max_lag: usize,
        /// Degrees of freedom used up by a fitted model.
        #[arg(long, default_value_t = 0)]
        fitdf: usize,
    },
    /// Number of differences suggested by repeated KPSS tests.
    Ndiffs {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        series: Series,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        #[arg(long, default_value_t = 2)]
        max_d: usize,
    },
    /// Differenced series with its mean.
    Diff {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        series: Series,
        #[arg(long, default_value_t = 1)]
        lag: usize,
        #[arg(long, default_value_t = 1)]
        order: usize,
    },
    /// Fits an ARIMA model; automatic order selection without --spec.
    Fit {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        series: Series,
        /// `p,d,q`, `p,d,q,P,D,Q,s`, or JSON / @file.
        #[arg(long)]
        spec: Option<String>,
        /// Include a mean term (only without differencing).
        #[arg(long)]
        mean: bool,
    },
    /// Forecasts with prediction intervals.
    Forecast {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        series: Series,
        #[arg(long)]
        spec: Option<String>,
        #[arg(long)]
        mean: bool,
        #[arg(long)]
        horizon: usize,
        /// Interval levels, e.g. 0.8,0.95.
        #[arg(long, value_delimiter = ',')]
        levels: Option<Vec<f64>>,
    },
    /// Runs the HTTP API.
    Serve {
        /// Port to listen on (all interfaces); overrides --bind's port.
        #[arg(long)]
        port: Option<u16>,
        /// Socket address, e.g. 127.0.0.1:8080.
        #[arg(long)]
        bind: Option<std::net::SocketAddr>,
        #[arg(long)]
        data_dir: Option<PathBuf>,
        #[arg(long)]
        max_upload_bytes: Option<usize>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum PlotKind {
    Histogram,
    Bar,
    Scatter,
    Line,
}

enum Failure {
    User(String),
    Internal(String),
}

impl From<datadesk_core::Error> for Failure {
    fn from(e: datadesk_core::Error) -> Self {
        Failure::User(format!("error[{}]: {e}", e.code()))
    }
}

type CliResult<T> = Result<T, Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprint!("{e}");
            return ExitCode::from(1);
        }
    };
    match run(cli.command) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(Failure::User(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(1)
        }
        Err(Failure::Internal(msg)) => {
            eprintln!("internal error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn load(input: &Input) -> CliResult<Table> {
    let bytes = std::fs::read(&input.input)
        .map_err(|e| Failure::User(format!("cannot read {}: {e}", input.input.display())))?;
    let options = ParseOptions {
        delimiter: input.delimiter,
        ..ParseOptions::default()
    };
    let name = input
        .input
        .file_name()
        .map(|n| n.to_string_lossy().into_owned());
    Ok(parse_csv(&bytes, &options)?.with_name(name.unwrap_or_default()))
}

/// Inline JSON, or `@path` to read it from a file.
fn json_arg<T: DeserializeOwned>(what: &str, arg: &str) -> CliResult<T> {
    let text = match arg.strip_prefix('@') {
        Some(path) => std::fs::read_to_string(Path::new(path))
            .map_err(|e| Failure::User(format!("cannot read {what} file {path}: {e}")))?,
        None => arg.to_owned(),
    };
    serde_json::from_str(&text).map_err(|e| Failure::User(format!("invalid {what}: {e}")))
}

fn arima_spec(arg: Option<&str>, mean: bool) -> CliResult<Option<ArimaSpec>> {
    let Some(arg) = arg else {
        return if mean {
            Err(Failure::User("--mean needs --spec".into()))
        } else {
            Ok(None)
        };
    };
    let spec = if arg.starts_with('{') || arg.starts_with('@') {
        json_arg("model spec", arg)?
    } else {
        let orders: Vec<usize> = arg
            .split(',')
            .map(|v| v.trim().parse())
            .collect::<Result<_, _>>()
            .map_err(|_| {
                Failure::User(format!(
                    "invalid model spec `{arg}`; expected p,d,q or p,d,q,P,D,Q,s"
                ))
            })?;
        match orders[..] {
            [p, d, q] => ArimaSpec::new(p, d, q),
            [p, d, q, sp, sd, sq, s] => ArimaSpec::new(p, d, q).seasonal(sp, sd, sq, s),
            _ => {
                return Err(Failure::User(format!(
                    "invalid model spec `{arg}`; expected p,d,q or p,d,q,P,D,Q,s"
                )))
            }
        }
    };
    Ok(Some(if mean { spec.with_mean(true) } else { spec }))
}

fn series_spec(series: &Series, table: &Table) -> CliResult<SeriesSpec> {
    if let Some(arg) = &series.series {
        return json_arg("series spec", arg);
    }
    let value_col = match &series.value {
        Some(v) => v.clone(),
        None => {
            let time_cols = [&series.date, &series.year, &series.period];
            let numeric: Vec<&str> = table
                .columns()
                .iter()
                .filter(|c| c.dtype().is_numeric())
                .map(|c| c.name())
                .filter(|n| !time_cols.iter().any(|t| t.as_deref() == Some(*n)))
                .collect();
            match numeric[..] {
                [only] => only.to_owned(),
                _ => {
                    return Err(Failure::User(
                        "several numeric columns; choose one with --value".into(),
                    ))
                }
            }
        }
    };
    let time = match (&series.date, &series.year, &series.period) {
        (Some(date_col), _, _) => TimeSpec::DateColumn {
            date_col: date_col.clone(),
            frequency: series.frequency,
        },
        (None, Some(year_col), Some(period_col)) => TimeSpec::YearPeriod {
            year_col: year_col.clone(),
            period_col: period_col.clone(),
            frequency: series.frequency,
        },
        (None, Some(year_col), None) => TimeSpec::Year {
            year_col: year_col.clone(),
        },
        _ => TimeSpec::Regular {
            start_year: 1,
            start_period: 1,
            frequency: series.frequency.unwrap_or(1),
        },
    };
    Ok(SeriesSpec { value_col, time })
}

fn emit<T: Serialize>(input: &Input, value: &T, chart: Option<ChartData>) -> CliResult<String> {
    match input.output {
        Output::Json => serde_json::to_string_pretty(value)
            .map(|s| s + "\n")
            .map_err(|e| Failure::Internal(e.to_string())),
        Output::Table => {
            let json = serde_json::to_value(value).map_err(|e| Failure::Internal(e.to_string()))?;
            Ok(render::render(&json))
        }
        Output::Svg => match chart {
            Some(chart) => Ok(render_svg(&chart, input.width, input.height)? + "\n"),
            None => Err(Failure::User(
                "this result has no chart form; use --output json or table".into(),
            )),
        },
    }
}

fn run(command: Command) -> CliResult<String> {
    match command {
        Command::Schema { input } => {
            let t = load(&input)?;
            emit(&input, &datadesk_core::table::schema(&t), None)
        }
        Command::Summary { input, column } => {
            let t = load(&input)?;
            emit(
                &input,
                &analysis::summary(&t, &analysis::ColumnRequest { column })?,
                None,
            )
        }
        Command::Filter { input, predicate } => {
            let t = load(&input)?;
            let req = analysis::FilterRequest {
                predicate: json_arg("predicate", &predicate)?,
                materialize: false,
            };
            emit(
                &input,
                &analysis::all_rows(&analysis::filter(&t, &req)?),
                None,
            )
        }
        Command::Select { input, columns } => {
            let t = load(&input)?;
            let req = analysis::SelectRequest {
                columns,
                materialize: false,
            };
            emit(
                &input,
                &analysis::all_rows(&analysis::select(&t, &req)?),
                None,
            )
        }
        Command::Aggregate { input, spec } => {
            let t = load(&input)?;
            let req = analysis::AggregateRequest {
                spec: json_arg("aggregation spec", &spec)?,
                materialize: false,
            };
            emit(
                &input,
                &analysis::all_rows(&analysis::aggregate(&t, &req)?),
                None,
            )
        }
        Command::Counts { input, column } => {
            let t = load(&input)?;
            let counts = analysis::counts(&t, &analysis::ColumnRequest { column })?;
            emit(&input, &counts, Some(ChartData::Bar(counts.clone())))
        }
        Command::Hist {
            input,
            column,
            bins,
        } => {
            let t = load(&input)?;
            let req = analysis::ChartRequest {
                kind: ChartKind::Histogram,
                columns: vec![column],
                bins,
            };
            let chart = analysis::chart(&t, &req)?;
            emit(&input, &chart, Some(chart.clone()))
        }
        Command::Plot {
            input,
            kind,
            columns,
            bins,
        } => {
            let t = load(&input)?;
            let kind = match kind {
                PlotKind::Histogram => ChartKind::Histogram,
                PlotKind::Bar => ChartKind::Bar,
                PlotKind::Scatter => ChartKind::Scatter,
                PlotKind::Line => ChartKind::Line,
            };
            let chart = analysis::chart(
                &t,
                &analysis::ChartRequest {
                    kind,
                    columns,
                    bins,
                },
            )?;
            emit(&input, &chart, Some(chart.clone()))
        }
        Command::Ljungbox {
            input,
            series,
            max_lag,
            fitdf,
        } => {
            let t = load(&input)?;
            let req = analysis::LjungBoxRequest {
                series: series_spec(&series, &t)?,
                max_lag,
                fitdf,
            };
            emit(&input, &analysis::ljung_box_test(&t, &req)?, None)
        }
        Command::Ndiffs {
            input,
            series,
            alpha,
            max_d,
        } => {
            let t = load(&input)?;
            let req = analysis::NdiffsRequest {
                series: series_spec(&series, &t)?,
                alpha,
                max_d,
            };
            emit(&input, &analysis::differencing_order(&t, &req)?, None)
        }
        Command::Diff {
            input,
            series,
            lag,
            order,
        } => {
            let t = load(&input)?;
            let req = analysis::DiffRequest {
                series: series_spec(&series, &t)?,
                lag,
                order,
            };
            let plot = analysis::diff(&t, &req)?;
            emit(&input, &plot, Some(ChartData::Series(plot.clone())))
        }
        Command::Fit {
            input,
            series,
            spec,
            mean,
        } => {
            let t = load(&input)?;
            let req = analysis::FitRequest {
                series: series_spec(&series, &t)?,
                spec: arima_spec(spec.as_deref(), mean)?,
            };
            emit(&input, &analysis::fit(&t, &req)?, None)
        }
        Command::Forecast {
            input,
            series,
            spec,
            mean,
            horizon,
            levels,
        } => {
            let t = load(&input)?;
            let req = analysis::ForecastRequest {
                series: series_spec(&series, &t)?,
                spec: arima_spec(spec.as_deref(), mean)?,
                horizon,
                levels,
            };
            emit(&input, &analysis::forecast_series(&t, &req)?, None)
        }
        Command::Serve {
            port,
            bind,
            data_dir,
            max_upload_bytes,
        } => serve(port, bind, data_dir, max_upload_bytes),
    }
}

fn serve(
    port: Option<u16>,
    bind: Option<std::net::SocketAddr>,
    data_dir: Option<PathBuf>,
    max_upload_bytes: Option<usize>,
) -> CliResult<String> {
    tracing_subscriber::fmt()
        .with_writer(std::io::stderr)
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()),
        )
        .init();
    let mut config = datadesk_service::Config::from_env().map_err(Failure::User)?;
    if let Some(bind) = bind {
        config.bind = bind;
    }
    if let Some(port) = port {
        config.bind.set_port(port);
    }
    if let Some(dir) = data_dir {
        config.data_dir = dir;
    }
    if let Some(max) = max_upload_bytes {
        config.max_upload_bytes = max;
    }
    let runtime = tokio::runtime::Runtime::new().map_err(|e| Failure::Internal(e.to_string()))?;
    runtime
        .block_on(datadesk_service::serve(config))
        .map_err(|e| Failure::Internal(e.to_string()))?;
    Ok(String::new())
}
