use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

const FORMATS: &str = "\
File formats:
  strand map     8-bit RGB PNG; R = hair mask, (G, B) = growth direction d as (d.x/2+0.5, d.y/2+0.5).
                 Background is (0, 128, 128). Image axes: +x right, +y down.
  depth map      16-bit grayscale PNG of nearness (1 = closest), 0 = no hair, plus a sidecar
                 <name>.json {d_near, d_far, width, height} next to it.
  mask           8-bit grayscale PNG, values >= 128 are set.
  strands        little-endian binary: i32 strand count, then per strand an i32 vertex count
                 followed by that many f32 (x, y, z) triples, root first.
  volume grid    little-endian f32 [occupancy, ox, oy, oz] per voxel, x fastest, plus a header
                 <file>.json {dims, bbox: {min, max}}.
  roots          JSON {roots: [{position: [x, y, z], direction: [x, y, z]}, ...]}.
  camera         JSON {fx, fy, cx, cy, extrinsics: 16 floats row-major world-to-camera, width, height}.
  strokes        JSON {imageId, strokes: [[[x, y], ...], ...]}, pixel coordinates, root first.
  super-pixels   16-bit grayscale PNG of labels (0 = off hair) plus <name>.json {count, adjacency}.
  pairs          JSON lines of {pairId, imageId?, p1: [x, y], p2: [x, y], superPixels: [a, b]}.
  answers        JSON lines of {pairId, groupId, choice: RED|BLUE|UNSURE, elapsed}.
  labels         JSON lines of {pairId, r: 1|-1|null, valid}.
  depth labels   JSON lines of {p1, p2, r, imageId?} consumed by `eval`.

Exit codes: 0 success, 1 usage, 2 I/O, 3 empty result, 4 invalid input.";

/// Strand maps, depth maps, strand rendering, voxel fields and metrics for
/// single-view hair modeling.
#[derive(Debug, Parser)]
#[command(name = "hairstep", version, after_long_help = FORMATS)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Render a strand model to a strand map, depth map and mask.
    Render(RenderArgs),
    /// Score predicted strand maps (and depth) against ground truth.
    Eval(EvalArgs),
    /// Turn annotated strokes into a dense strand map.
    Strokes2map(Strokes2mapArgs),
    /// Cluster the hair region of an image into super-pixels.
    Superpixels(SuperpixelsArgs),
    /// Draw point pairs across adjacent super-pixels for depth annotation.
    SamplePairs(SamplePairsArgs),
    /// Merge per-group answers into depth labels.
    Aggregate(AggregateArgs),
    /// Estimate an undirected orientation map with a Gabor filter bank.
    Gabor(GaborArgs),
    /// Convert strands to occupancy and orientation voxel fields.
    Strands2fields(Strands2fieldsArgs),
    /// Grow strands from scalp roots through a voxel field.
    Grow(GrowArgs),
    /// Generate a seeded synthetic hairstyle.
    SynthWig(SynthWigArgs),
    /// Wig, fields, regrowth and re-render, scored against the original.
    ClosedLoop(ClosedLoopArgs),
    /// Serve depth-pair annotation tasks over HTTP.
    Serve(ServeArgs),
}

fn parse_pair(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or("expected two comma-separated numbers")?;
    let a: f64 = a.trim().parse().map_err(|e| format!("{e}"))?;
    let b: f64 = b.trim().parse().map_err(|e| format!("{e}"))?;
    if a > b {
        return Err(format!("range {a},{b} is reversed"));
    }
    Ok((a, b))
}

fn parse_dims(s: &str) -> Result<[usize; 3], String> {
    let parts: Vec<usize> = s
        .split(',')
        .map(|p| p.trim().parse::<usize>().map_err(|e| format!("{e}")))
        .collect::<Result<_, _>>()?;
    match parts[..] {
        [n] => Ok([n; 3]),
        [x, y, z] => Ok([x, y, z]),
        _ => Err("expected N or NX,NY,NZ".into()),
    }
}

fn parse_bbox(s: &str) -> Result<[f64; 6], String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("{e}")))
        .collect::<Result<_, _>>()?;
    v.try_into().map_err(|_| "expected MINX,MINY,MINZ,MAXX,MAXY,MAXZ".to_string())
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    /// Strand model file.
    #[arg(long)]
    pub hair: PathBuf,
    /// Camera file. Without it, `--views` random orbit cameras are drawn.
    #[arg(long)]
    pub camera: Option<PathBuf>,
    /// Output directory: strand_map.png, depth.png (+ depth.json) and
    /// mask.png, or one view_NNN/ directory per random view that also holds
    /// camera.json.
    #[arg(long)]
    pub out: PathBuf,
    /// Stroke width in pixels.
    #[arg(long, default_value_t = 1.0)]
    pub line_width: f64,
    /// Mask of pixels in front of the hair, removed after visibility.
    #[arg(long)]
    pub occluder: Option<PathBuf>,
    #[command(flatten)]
    pub views: ViewArgs,
}

#[derive(Debug, Args)]
pub struct ViewArgs {
    /// Number of random views.
    #[arg(long, default_value_t = 3)]
    pub views: usize,
    /// Seed for the random views; required without `--camera`.
    #[arg(long, required_unless_present = "camera")]
    pub seed: Option<u64>,
    /// Azimuth range in degrees, `MIN,MAX`.
    #[arg(long, value_parser = parse_pair, default_value = "-60,60", allow_hyphen_values = true)]
    pub azimuth: (f64, f64),
    /// Elevation range in degrees, `MIN,MAX`.
    #[arg(long, value_parser = parse_pair, default_value = "-10,30", allow_hyphen_values = true)]
    pub elevation: (f64, f64),
    /// Camera distance from the model's bounding-box center.
    #[arg(long, default_value_t = 6.0)]
    pub distance: f64,
    /// Focal length in pixels.
    #[arg(long, default_value_t = 410.0)]
    pub focal: f64,
    #[arg(long, default_value_t = 256)]
    pub width: usize,
    #[arg(long, default_value_t = 256)]
    pub height: usize,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Directory of predicted strand maps named `<image>.png`.
    #[arg(long)]
    pub pred: PathBuf,
    /// Directory of ground-truth strand maps named `<image>.png`.
    #[arg(long)]
    pub gt: PathBuf,
    /// Directory of predicted depth maps named `<image>.png` with sidecars.
    #[arg(long)]
    pub depth: Option<PathBuf>,
    /// Depth labels; records without imageId apply to every image.
    #[arg(long)]
    pub pairs: Option<PathBuf>,
    /// Output directory for metrics.jsonl, summary.csv and summary.json.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct Strokes2mapArgs {
    /// Stroke file.
    #[arg(long)]
    pub strokes: PathBuf,
    /// Hair mask the strokes are clipped to and interpolated over.
    #[arg(long)]
    pub mask: PathBuf,
    /// Dense strand map to write.
    #[arg(long)]
    pub out: PathBuf,
    /// Also write the sparse stroke-only strand map here.
    #[arg(long)]
    pub sparse: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SuperpixelsArgs {
    /// Grayscale (or color, converted to luma) input image.
    #[arg(long)]
    pub image: PathBuf,
    /// Hair mask.
    #[arg(long)]
    pub hair: PathBuf,
    /// Face mask, used to scale the super-pixel count.
    #[arg(long)]
    pub face: PathBuf,
    /// Hair pixels per super-pixel before the hair/face scaling.
    #[arg(long, default_value_t = 400.0)]
    pub density: f64,
    #[arg(long, default_value_t = 10.0)]
    pub compactness: f64,
    #[arg(long, default_value_t = 10)]
    pub iterations: usize,
    #[arg(long)]
    pub seed: u64,
    /// Label PNG to write (its sidecar goes next to it).
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SamplePairsArgs {
    /// Super-pixel label PNG with its sidecar.
    #[arg(long)]
    pub superpixels: PathBuf,
    /// Pairs drawn per adjacent super-pixel pair.
    #[arg(long, default_value_t = 1)]
    pub per_adjacency: usize,
    #[arg(long)]
    pub seed: u64,
    /// Tag every pair with this image id (pair ids become `<image>:<n>`).
    #[arg(long)]
    pub image_id: Option<String>,
    /// Pairs file to write.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct AggregateArgs {
    /// Answers file.
    #[arg(long)]
    pub answers: PathBuf,
    /// Labels file to write.
    #[arg(long)]
    pub out: PathBuf,
    /// Also write the summary statistics as JSON here.
    #[arg(long)]
    pub stats: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GaborArgs {
    #[arg(long)]
    pub image: PathBuf,
    #[arg(long)]
    pub mask: PathBuf,
    /// Strand map to write. Each orientation is stored as its
    /// representative angle in `[0, 180)`.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 180)]
    pub orientations: usize,
    #[arg(long, default_value_t = 4.0)]
    pub wavelength: f64,
    #[arg(long, default_value_t = 2.0)]
    pub sigma: f64,
    #[arg(long, default_value_t = 0.5)]
    pub aspect: f64,
}

#[derive(Debug, Args)]
pub struct Strands2fieldsArgs {
    /// Strand model file.
    #[arg(long)]
    pub hair: PathBuf,
    /// Grid resolution, `N` or `NX,NY,NZ`.
    #[arg(long, value_parser = parse_dims, default_value = "128")]
    pub dims: [usize; 3],
    /// Bounding box `MINX,MINY,MINZ,MAXX,MAXY,MAXZ`; defaults to a cube
    /// around the strands.
    #[arg(long, value_parser = parse_bbox, allow_hyphen_values = true)]
    pub bbox: Option<[f64; 6]>,
    /// Relative margin of the default cube.
    #[arg(long, default_value_t = 0.05)]
    pub margin: f64,
    /// Occupancy radius around each strand sample, in voxel edges.
    #[arg(long, default_value_t = 1.0)]
    pub radius: f64,
    /// Volume grid file to write.
    #[arg(long)]
    pub out: PathBuf,
    /// Also draw this many labelled training points (even).
    #[arg(long, requires_all = ["seed", "samples_out"])]
    pub samples: Option<usize>,
    /// Near-surface band for training points, in voxel edges.
    #[arg(long, default_value_t = 1.0)]
    pub band: f64,
    #[arg(long)]
    pub seed: Option<u64>,
    /// JSON lines of {position, occLabel, orientLabel, nearSurface}.
    #[arg(long)]
    pub samples_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GrowArgs {
    /// Volume grid file.
    #[arg(long)]
    pub fields: PathBuf,
    /// Roots file.
    #[arg(long, required_unless_present = "roots_from", conflicts_with = "roots_from")]
    pub roots: Option<PathBuf>,
    /// Take roots from the first segment of every strand in this model.
    #[arg(long)]
    pub roots_from: Option<PathBuf>,
    /// Strand model to write.
    #[arg(long)]
    pub out: PathBuf,
    /// Step length; defaults to half the smallest voxel edge.
    #[arg(long)]
    pub step: Option<f64>,
    #[arg(long, default_value_t = 0.5)]
    pub threshold: f64,
    #[arg(long, default_value_t = 300)]
    pub max_steps: usize,
    /// Weight of the previous direction when blending with the field.
    #[arg(long, default_value_t = 0.3)]
    pub inertia: f64,
}

#[derive(Debug, Args)]
pub struct SynthWigArgs {
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value_t = 2000)]
    pub strands: usize,
    /// Vertices per strand.
    #[arg(long, default_value_t = 32)]
    pub vertices: usize,
    /// Strand model to write.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ClosedLoopArgs {
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value_t = 2000)]
    pub strands: usize,
    /// Grid resolution per axis.
    #[arg(long, default_value_t = 128)]
    pub grid: usize,
    /// Occupancy radius in voxel edges.
    #[arg(long, default_value_t = 1.0)]
    pub radius: f64,
    /// Render size in pixels (square).
    #[arg(long, default_value_t = 256)]
    pub size: usize,
    #[arg(long, default_value_t = 410.0)]
    pub focal: f64,
    /// Number of views, evenly spaced in azimuth.
    #[arg(long, default_value_t = 3)]
    pub views: usize,
    /// Also write the report and both renders of every view here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    /// Directory of the images the pairs refer to, served under /images/.
    #[arg(long)]
    pub images: PathBuf,
    /// Pairs file; every pair should carry an imageId.
    #[arg(long)]
    pub pairs: PathBuf,
    /// Append-only answers log, created if absent and replayed at startup.
    #[arg(long)]
    pub state: PathBuf,
    #[arg(long, env = "HAIRSTEP_PORT", default_value_t = 8080)]
    pub port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    pub host: String,
    /// Directory of built UI assets; a minimal page is served without it.
    #[arg(long)]
    pub ui: Option<PathBuf>,
    /// Seed of the per-group task order.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Seconds a handed-out task stays reserved for its group.
    #[arg(long, default_value_t = 120)]
    pub lease_secs: u64,
}
