use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use drawscaffold_core::geometry::BoundingBox;
use drawscaffold_core::imagecore::{BlurFilter, ImageBuffer};
use drawscaffold_core::palette::{isolate_color_preview, ClusterMode, PaletteSource};
use drawscaffold_core::segmentation::{ProviderConfig, SegmentationRequest};
use drawscaffold_core::svg::SvgOverlay;
use drawscaffold_service::pipeline::{self, ContourBudget};
use drawscaffold_service::{ServiceConfig, SessionConfig};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "drawscaffold", version, about = "Composition, value and color guidance for drawing practice")]
struct Cli {
    /// TOML config file; DRAWSCAFFOLD_* variables and flags override it.
    #[arg(long, global = true, env = "DRAWSCAFFOLD_CONFIG")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Polygons and composition lines for the objects in an image.
    Compose(ComposeArgs),
    /// Value feedback against a canvas, or a blurred value image.
    Value(ValueArgs),
    /// Color feedback against a canvas.
    Color(ColorArgs),
    /// Keep only the dominant color under a pixel; everything else turns white.
    Isolate(IsolateArgs),
    /// Run the HTTP service.
    Serve(ServeArgs),
}

/// Per-analysis settings; names follow the config keys.
#[derive(Args, Default)]
struct SessionFlags {
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    k_lines: Option<usize>,
    /// Seeds both line fitting and clustering.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    theta_dis: Option<f64>,
    #[arg(long)]
    theta_inl: Option<f64>,
    #[arg(long)]
    palette_k: Option<usize>,
    #[arg(long)]
    region_threshold: Option<f64>,
    #[arg(long)]
    filter: Option<BlurFilter>,
    #[arg(long)]
    kernel_size: Option<f64>,
}

impl SessionFlags {
    fn apply(&self, cfg: &mut SessionConfig) {
        if let Some(v) = self.epsilon {
            cfg.epsilon = v;
        }
        if let Some(v) = self.k_lines {
            cfg.k_lines = v;
        }
        if let Some(v) = self.seed {
            cfg.ransac.seed = v;
            cfg.palette.seed = v;
        }
        if let Some(v) = self.theta_dis {
            cfg.ransac.theta_dis = v;
        }
        if let Some(v) = self.theta_inl {
            cfg.ransac.theta_inl = v;
        }
        if let Some(v) = self.palette_k {
            cfg.palette.k = v;
        }
        if let Some(v) = self.region_threshold {
            cfg.palette.region_threshold = v;
        }
        if let Some(v) = self.filter {
            cfg.blur.filter = v;
        }
        if let Some(v) = self.kernel_size {
            cfg.blur.kernel_size = v;
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ProviderKind {
    Box,
    Files,
    Sidecar,
}

#[derive(Args, Default)]
struct ProviderFlags {
    #[arg(long, value_enum)]
    provider: Option<ProviderKind>,
    /// Directory of `<label>.png` masks for the files provider.
    #[arg(long)]
    provider_dir: Option<PathBuf>,
    #[arg(long)]
    sidecar_url: Option<String>,
    #[arg(long)]
    sidecar_timeout_secs: Option<u64>,
}

impl ProviderFlags {
    fn apply(&self, current: &ProviderConfig) -> Result<ProviderConfig> {
        let kind = match (self.provider, &self.sidecar_url, &self.provider_dir) {
            (Some(k), _, _) => k,
            (None, Some(_), _) => ProviderKind::Sidecar,
            (None, None, Some(_)) => ProviderKind::Files,
            (None, None, None) => return Ok(current.clone()),
        };
        Ok(match kind {
            ProviderKind::Box => ProviderConfig::Box,
            ProviderKind::Files => ProviderConfig::Files {
                dir: self.provider_dir.clone().context("--provider files needs --provider-dir")?,
            },
            ProviderKind::Sidecar => ProviderConfig::Sidecar {
                url: self.sidecar_url.clone().context("--provider sidecar needs --sidecar-url")?,
                timeout_secs: self.sidecar_timeout_secs.unwrap_or(30),
            },
        })
    }
}

#[derive(Args)]
struct ComposeArgs {
    #[arg(long)]
    reference: PathBuf,
    /// Text prompt for the segmentation provider.
    #[arg(long)]
    prompt: Option<String>,
    /// Normalized box `x_min,y_min,x_max,y_max`; repeatable.
    #[arg(long = "box", value_parser = parse_box)]
    boxes: Vec<BoundingBox>,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write an SVG overlay of polygons, top lines and grids.
    #[arg(long)]
    svg: Option<PathBuf>,
    #[command(flatten)]
    provider: ProviderFlags,
    #[command(flatten)]
    session: SessionFlags,
}

#[derive(Clone, Copy, Default, ValueEnum)]
enum Target {
    #[default]
    Reference,
    Canvas,
}

#[derive(Args)]
struct ValueArgs {
    #[arg(long)]
    reference: PathBuf,
    #[arg(long)]
    canvas: Option<PathBuf>,
    /// Write the blurred value image of `--target` here.
    #[arg(long)]
    guidance: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t)]
    target: Target,
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    session: SessionFlags,
}

#[derive(Args)]
struct ColorArgs {
    #[arg(long)]
    reference: PathBuf,
    #[arg(long)]
    canvas: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    session: SessionFlags,
}

#[derive(Args)]
struct IsolateArgs {
    #[arg(long)]
    reference: PathBuf,
    /// Pixel column.
    #[arg(long, allow_negative_numbers = true)]
    x: i64,
    /// Pixel row.
    #[arg(long, allow_negative_numbers = true)]
    y: i64,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    session: SessionFlags,
}

#[derive(Args)]
struct ServeArgs {
    #[arg(long)]
    listen: Option<String>,
    #[arg(long)]
    data_dir: Option<PathBuf>,
    #[arg(long)]
    max_pixels: Option<u64>,
    #[arg(long)]
    request_timeout_secs: Option<u64>,
    #[command(flatten)]
    provider: ProviderFlags,
    #[command(flatten)]
    session: SessionFlags,
}

fn parse_box(s: &str) -> Result<BoundingBox, String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("`{p}`: {e}")))
        .collect::<Result<_, _>>()?;
    let [a, b, c, d] = v[..] else {
        return Err(format!("expected 4 comma-separated numbers, got {}", v.len()));
    };
    BoundingBox::new(a.min(c), b.min(d), a.max(c), b.max(d)).map_err(|e| e.to_string())
}

fn open(path: &Path, limit: u64) -> Result<ImageBuffer> {
    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    ImageBuffer::from_png_bytes_limited(&bytes, limit).with_context(|| format!("decoding {}", path.display()))
}

/// Canvas resampled onto the reference frame, as the service does on upload.
fn open_canvas(path: &Path, reference: &ImageBuffer, limit: u64) -> Result<ImageBuffer> {
    let (w, h) = reference.dimensions();
    Ok(open(path, limit)?.letterbox(w, h)?)
}

fn emit<T: Serialize>(value: &T, out: Option<&Path>) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display()))?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn session_config(base: &ServiceConfig, flags: &SessionFlags) -> Result<SessionConfig> {
    let mut cfg = base.defaults;
    flags.apply(&mut cfg);
    cfg.validate()?;
    Ok(cfg)
}

fn compose(base: &ServiceConfig, args: ComposeArgs) -> Result<()> {
    let cfg = session_config(base, &args.session)?;
    let provider = args.provider.apply(&base.provider)?.build();
    let reference = open(&args.reference, base.max_pixels)?;
    let request = SegmentationRequest {
        image: reference.clone(),
        text_prompt: args.prompt.filter(|p| !p.trim().is_empty()),
        boxes: args.boxes,
    };
    let (seg, fallback) = pipeline::run_segmentation(&request, provider.as_ref())?;
    let report = pipeline::composition_report(&seg, fallback, &cfg)?;
    if let Some(path) = &args.svg {
        let polygons: Vec<_> = report.polygons.iter().map(|p| p.polygon.clone()).collect();
        let grids: Vec<_> = report.grids.iter().flat_map(|g| g.primitives.clone()).collect();
        let (w, h) = reference.dimensions();
        let svg = SvgOverlay::new(w, h)
            .add_grid(&grids)
            .add_polygons(&polygons)
            .add_lines(&report.lines)
            .render();
        std::fs::write(path, svg).with_context(|| format!("writing {}", path.display()))?;
    }
    emit(&report, args.out.as_deref())
}

fn value(base: &ServiceConfig, args: ValueArgs) -> Result<()> {
    if args.canvas.is_none() && args.guidance.is_none() {
        bail!("nothing to do: pass --canvas for feedback and/or --guidance for a value image");
    }
    let cfg = session_config(base, &args.session)?;
    let reference = open(&args.reference, base.max_pixels)?;
    let canvas = match &args.canvas {
        Some(p) => Some(open_canvas(p, &reference, base.max_pixels)?),
        None => None,
    };
    if let Some(path) = &args.guidance {
        let source = match args.target {
            Target::Reference => &reference,
            Target::Canvas => canvas.as_ref().context("--target canvas needs --canvas")?,
        };
        pipeline::value_guidance(source, &cfg.blur)?
            .save(path)
            .with_context(|| format!("writing {}", path.display()))?;
    }
    if let Some(canvas) = &canvas {
        let report = pipeline::feedback_from_images(canvas, &reference, ClusterMode::Value, &cfg, budget(base))?;
        emit(&report, args.out.as_deref())?;
    }
    Ok(())
}

fn budget(base: &ServiceConfig) -> ContourBudget {
    ContourBudget {
        epsilon: base.contour_epsilon,
        max_contours: base.max_contours,
    }
}

fn color(base: &ServiceConfig, args: ColorArgs) -> Result<()> {
    let cfg = session_config(base, &args.session)?;
    let reference = open(&args.reference, base.max_pixels)?;
    let canvas = open_canvas(&args.canvas, &reference, base.max_pixels)?;
    let report = pipeline::feedback_from_images(&canvas, &reference, ClusterMode::Color, &cfg, budget(base))?;
    emit(&report, args.out.as_deref())
}

fn isolate(base: &ServiceConfig, args: IsolateArgs) -> Result<()> {
    let cfg = session_config(base, &args.session)?;
    let reference = open(&args.reference, base.max_pixels)?;
    let palette = pipeline::palette_for(
        &drawscaffold_core::palette::LabImage::new(&reference),
        ClusterMode::Color,
        PaletteSource::Reference,
        &cfg.palette,
    )?;
    let out = isolate_color_preview(&reference, &palette, args.x, args.y, cfg.palette.region_threshold)?;
    out.save(&args.out)
        .with_context(|| format!("writing {}", args.out.display()))?;
    Ok(())
}

fn serve(mut base: ServiceConfig, args: ServeArgs) -> Result<()> {
    if let Some(v) = args.listen {
        base.listen = v;
    }
    if let Some(v) = args.data_dir {
        base.data_dir = Some(v);
    }
    if let Some(v) = args.max_pixels {
        base.max_pixels = v;
    }
    if let Some(v) = args.request_timeout_secs {
        base.request_timeout_secs = v;
    }
    base.provider = args.provider.apply(&base.provider)?;
    args.session.apply(&mut base.defaults);
    base.validate()?;
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()),
        )
        .init();
    let runtime = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .thread_keep_alive(Duration::from_secs(60))
        .build()?;
    runtime.block_on(drawscaffold_service::serve(base))?;
    Ok(())
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let base = ServiceConfig::load(cli.config.as_deref())?;
    match cli.command {
        Command::Compose(a) => compose(&base, a),
        Command::Value(a) => value(&base, a),
        Command::Color(a) => color(&base, a),
        Command::Isolate(a) => isolate(&base, a),
        Command::Serve(a) => serve(base, a),
    }
}
