//! Command-line front end: single-pair detection/correction, table-suite
//! benchmarks, and synthetic fixture generation.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use rstreg::pipeline::{correct_rst, RegistrationReport};
use rstreg::raster::{load_pnm, save_pnm, GrayImage};
use rstreg::registration::RotationSearchConfig;
use rstreg::synth::{
    forward_rst, generate_glyph, rows_to_csv, run_table_suite, GlyphSpec, GroundTruthSidecar,
    SuiteConfig, Table,
};
use rstreg::{Error, RstParams};

const EXIT_HELP: &str = "\
EXIT CODES:
    0   success
    2   invalid arguments or configuration
    3   I/O error (unreadable or unwritable path)
    4   malformed or unsupported image file
    5   blank image (no ink at the configured threshold)
    6   no signal (all candidate angles correlate equally)
    7   transformed content exceeds the canvas
    8   resize would produce an empty image";

#[derive(Parser)]
#[command(
    name = "rstreg",
    version,
    about = "Estimate and cancel rotation, scaling and translation between two images",
    after_help = EXIT_HELP
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Detect RST parameters between a reference and a test image.
    Detect {
        /// Reference image (PGM/PPM).
        reference: PathBuf,
        /// Test image (PGM/PPM).
        user: PathBuf,
        #[command(flatten)]
        search: SearchArgs,
        /// Report format: full json or a one-line csv summary.
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Correct the test image against the reference and write the result.
    Correct {
        reference: PathBuf,
        user: PathBuf,
        /// Output path for the corrected PGM.
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        search: SearchArgs,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Regenerate benchmark tables on synthetic glyphs, as CSV.
    Bench {
        /// Table to run: 1 (rotation), 2 (scaling), 3 (translation),
        /// 4 (combined), or all.
        #[arg(long, default_value = "all")]
        table: TableSelector,
        /// Number of glyphs per table.
        #[arg(long, default_value_t = 5)]
        glyphs: usize,
        /// Base seed for glyph generation.
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Canvas for tables 1-3, WxH. Table 4 uses --combined-canvas.
        #[arg(long, default_value = "256x256", value_parser = parse_dims)]
        canvas: (usize, usize),
        /// Canvas for the combined table, WxH.
        #[arg(long, default_value = "384x384", value_parser = parse_dims)]
        combined_canvas: (usize, usize),
        #[command(flatten)]
        search: SearchArgs,
    },
    /// Write a glyph with a known RST perturbation plus a ground-truth
    /// JSON sidecar.
    Synth {
        /// Glyph seed.
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Use the wide thin-stroked glyph shape.
        #[arg(long)]
        elongated: bool,
        /// Applied rotation, degrees.
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        rotation: f64,
        /// Applied scale ratio (reference size over test size).
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
        /// Blank columns left of the content.
        #[arg(long, default_value_t = 0)]
        tx: usize,
        /// Blank rows below the content.
        #[arg(long, default_value_t = 0)]
        ty: usize,
        /// Canvas size, WxH.
        #[arg(long, default_value = "256x256", value_parser = parse_dims)]
        canvas: (usize, usize),
        /// Output path for the PGM; the sidecar lands next to it as .json.
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct SearchArgs {
    /// Binarization threshold, strictly inside (0, 1).
    #[arg(long, default_value_t = 0.5)]
    threshold: f64,
    /// Lower end of the rotation search range, degrees.
    #[arg(long, default_value_t = -60.0, allow_negative_numbers = true)]
    range_min: f64,
    /// Upper end of the rotation search range, degrees.
    #[arg(long, default_value_t = 60.0, allow_negative_numbers = true)]
    range_max: f64,
    /// Coarse sweep step, degrees.
    #[arg(long, default_value_t = 5.0)]
    coarse_step: f64,
    /// Fine sweep step, degrees.
    #[arg(long, default_value_t = 1.0)]
    fine_step: f64,
    /// Fine window half-width around the coarse peak, degrees.
    #[arg(long, default_value_t = 3.0)]
    fine_halfwidth: f64,
    /// Background luminance for exposed canvas.
    #[arg(long, default_value_t = 1.0)]
    fill: f64,
}

impl SearchArgs {
    fn rotation_config(&self) -> RotationSearchConfig {
        RotationSearchConfig {
            range_min_deg: self.range_min,
            range_max_deg: self.range_max,
            coarse_step_deg: self.coarse_step,
            fine_halfwidth_deg: self.fine_halfwidth,
            fine_step_deg: self.fine_step,
            fill: self.fill,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum TableSelector {
    One(Table),
    All,
}

impl std::str::FromStr for TableSelector {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("all") {
            return Ok(Self::All);
        }
        s.parse::<u8>()
            .ok()
            .and_then(Table::from_index)
            .map(Self::One)
            .ok_or_else(|| format!("invalid table selector `{s}` (expected 1-4 or all)"))
    }
}

fn parse_dims(s: &str) -> Result<(usize, usize), String> {
    let (w, h) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected WxH, got `{s}`"))?;
    let parse = |v: &str| {
        v.trim()
            .parse::<usize>()
            .map_err(|_| format!("invalid dimension `{v}`"))
    };
    let dims = (parse(w)?, parse(h)?);
    if dims.0 == 0 || dims.1 == 0 {
        return Err("dimensions must be nonzero".into());
    }
    Ok(dims)
}

enum CliError {
    Core(Error),
    Io { path: PathBuf, source: std::io::Error },
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        Self::Core(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            Self::Io { .. } => 3,
            Self::Core(e) => match e {
                Error::UnsupportedMagic(_)
                | Error::MalformedHeader(_)
                | Error::TruncatedData { .. }
                | Error::ZeroDimensions
                | Error::DimensionsTooLarge { .. }
                | Error::MaxvalOutOfRange(_)
                | Error::BadBufferLength { .. }
                | Error::PixelOutOfRange(_) => 4,
                Error::BlankImage => 5,
                Error::NoSignal => 6,
                Error::ContentOverflow { .. } => 7,
                Error::DegenerateSize => 8,
                Error::DimensionMismatch(..)
                | Error::DegenerateRange
                | Error::InvalidConfig(_) => 2,
            },
        }
    }

    fn report(&self) -> String {
        match self {
            Self::Core(e) => format!("error: {e}"),
            Self::Io { path, source } => format!("error: {}: {source}", path.display()),
        }
    }
}

fn read_gray(path: &Path) -> Result<GrayImage, CliError> {
    let bytes = std::fs::read(path).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })?;
    Ok(load_pnm(&bytes)?.into_gray())
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    std::fs::write(path, bytes).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })
}

fn report_summary_csv(report: &RegistrationReport) -> String {
    let d = &report.detected;
    format!(
        "rotation_deg,scale,scale_x,dx,dy\n{},{},{},{},{}\n",
        d.rotation_deg,
        d.scale,
        report.scale_x.unwrap_or(f64::NAN),
        d.translation.dx,
        d.translation.dy
    )
}

fn print_report(report: &RegistrationReport, format: Format) {
    match format {
        Format::Json => println!("{}", report.to_json()),
        Format::Csv => print!("{}", report_summary_csv(report)),
    }
}

fn cmd_detect(
    reference: &Path,
    user: &Path,
    search: &SearchArgs,
    format: Format,
) -> Result<(), CliError> {
    let reference = read_gray(reference)?;
    let user = read_gray(user)?;
    let (_, report) = correct_rst(&reference, &user, &search.rotation_config(), search.threshold)?;
    print_report(&report, format);
    Ok(())
}

fn cmd_correct(
    reference: &Path,
    user: &Path,
    out: &Path,
    search: &SearchArgs,
    format: Format,
) -> Result<(), CliError> {
    let reference = read_gray(reference)?;
    let user = read_gray(user)?;
    let (corrected, report) =
        correct_rst(&reference, &user, &search.rotation_config(), search.threshold)?;
    write_file(out, &save_pnm(&corrected, 255)?)?;
    print_report(&report, format);
    Ok(())
}

fn cmd_bench(
    selector: TableSelector,
    glyph_count: usize,
    seed: u64,
    canvas: (usize, usize),
    combined_canvas: (usize, usize),
    search: &SearchArgs,
) -> Result<(), CliError> {
    let tables = match selector {
        TableSelector::One(t) => vec![t],
        TableSelector::All => vec![
            Table::PureRotation,
            Table::PureScaling,
            Table::PureTranslation,
            Table::Combined,
        ],
    };
    let mut rows = Vec::new();
    for table in tables {
        // The combined table needs signature-proportioned glyphs and a
        // canvas that fits enlarged test images; the pure tables run the
        // compact glyphs on the default canvas.
        let (glyphs, table_canvas) = if table == Table::Combined {
            (GlyphSpec::elongated_family(glyph_count, seed), combined_canvas)
        } else {
            (GlyphSpec::family(glyph_count, seed), canvas)
        };
        let cfg = SuiteConfig {
            rotation_search: search.rotation_config(),
            threshold: search.threshold,
            canvas: table_canvas,
        };
        rows.extend(run_table_suite(table, &glyphs, &cfg)?);
    }
    print!("{}", rows_to_csv(&rows));
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_synth(
    seed: u64,
    elongated: bool,
    params: RstParams,
    canvas: (usize, usize),
    out: &Path,
) -> Result<(), CliError> {
    let spec = if elongated {
        GlyphSpec::elongated("synth", seed)
    } else {
        GlyphSpec::new("synth", seed)
    };
    let glyph = generate_glyph(&spec)?;
    let image = forward_rst(&glyph, &params, canvas)?;
    write_file(out, &save_pnm(&image, 255)?)?;
    let sidecar = GroundTruthSidecar::from(params);
    let sidecar_path = out.with_extension("json");
    let json = serde_json::to_string_pretty(&sidecar).expect("sidecar serializes");
    write_file(&sidecar_path, json.as_bytes())?;
    eprintln!(
        "wrote {} and {}",
        out.display(),
        sidecar_path.display()
    );
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Detect {
            reference,
            user,
            search,
            format,
        } => cmd_detect(reference, user, search, *format),
        Command::Correct {
            reference,
            user,
            out,
            search,
            format,
        } => cmd_correct(reference, user, out, search, *format),
        Command::Bench {
            table,
            glyphs,
            seed,
            canvas,
            combined_canvas,
            search,
        } => cmd_bench(*table, *glyphs, *seed, *canvas, *combined_canvas, search),
        Command::Synth {
            seed,
            elongated,
            rotation,
            scale,
            tx,
            ty,
            canvas,
            out,
        } => cmd_synth(
            *seed,
            *elongated,
            RstParams::new(*rotation, *scale, *tx, *ty),
            *canvas,
            out,
        ),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("{}", err.report());
            ExitCode::from(err.exit_code())
        }
    }
}
