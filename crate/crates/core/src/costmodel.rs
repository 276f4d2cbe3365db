//! Analytic FLOPs for convolutional networks.
//!
//! One multiply-accumulate counts as 2 FLOPs. Biases, batch-norm and
//! activations are ignored. Pooling and flatten layers cost nothing.

use std::fmt;
use std::path::Path;

use crate::error::{Error, Result};

/// Frame rate at or above which a network counts as real-time.
pub const REAL_TIME_FPS: f64 = 15.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Layer {
    Conv {
        kernel: usize,
        stride: usize,
        padding: usize,
        in_channels: usize,
        out_channels: usize,
    },
    MaxPool {
        kernel: usize,
        stride: usize,
    },
    /// Pools any spatial size down to `out_h × out_w`.
    AdaptivePool {
        out_h: usize,
        out_w: usize,
    },
    FullyConnected {
        out_features: usize,
    },
    Flatten,
}

impl fmt::Display for Layer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Layer::Conv {
                kernel,
                stride,
                padding,
                in_channels,
                out_channels,
            } => write!(
                f,
                "conv kernel={kernel} stride={stride} pad={padding} in={in_channels} out={out_channels}"
            ),
            Layer::MaxPool { kernel, stride } => write!(f, "maxpool kernel={kernel} stride={stride}"),
            Layer::AdaptivePool { out_h, out_w } => write!(f, "adaptivepool h={out_h} w={out_w}"),
            Layer::FullyConnected { out_features } => write!(f, "fc out={out_features}"),
            Layer::Flatten => f.write_str("flatten"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConvNetSpec {
    pub name: String,
    pub layers: Vec<Layer>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InputSpec {
    pub height: usize,
    pub width: usize,
    pub channels: usize,
}

impl InputSpec {
    pub const fn new(height: usize, width: usize, channels: usize) -> Self {
        Self {
            height,
            width,
            channels,
        }
    }
}

/// Gaze-CNN input crops: full face, two-eye strip and single eye, each at
/// full and half resolution. `(label, input)`; sizes are width × height.
pub const GAZE_INPUTS: [(&str, InputSpec); 6] = [
    ("face 224x224", InputSpec::new(224, 224, 3)),
    ("face 112x112", InputSpec::new(112, 112, 3)),
    ("two-eyes 180x60", InputSpec::new(60, 180, 3)),
    ("two-eyes 90x30", InputSpec::new(30, 90, 3)),
    ("single-eye 60x32", InputSpec::new(32, 60, 3)),
    ("single-eye 30x18", InputSpec::new(18, 30, 3)),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Shape {
    Spatial { c: usize, h: usize, w: usize },
    Flat(usize),
}

impl Shape {
    fn len(&self) -> usize {
        match *self {
            Shape::Spatial { c, h, w } => c * h * w,
            Shape::Flat(n) => n,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LayerCost {
    pub layer: Layer,
    pub flops: u64,
    /// `(channels, height, width)`; height and width are 1 once flattened.
    pub output: (usize, usize, usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlopsReport {
    pub total: u64,
    pub layers: Vec<LayerCost>,
}

/// Output length of a sliding window, or `None` if it would be below 1.
fn window_out(size: usize, kernel: usize, stride: usize, padding: usize) -> Option<usize> {
    let padded = size + 2 * padding;
    (padded >= kernel).then(|| (padded - kernel) / stride + 1)
}

pub fn flops_report(spec: &ConvNetSpec, input: InputSpec) -> Result<FlopsReport> {
    if input.height == 0 || input.width == 0 || input.channels == 0 {
        return Err(Error::InvalidArgument("input dims must be >= 1".into()));
    }
    let mut shape = Shape::Spatial {
        c: input.channels,
        h: input.height,
        w: input.width,
    };
    let mut layers = Vec::with_capacity(spec.layers.len());
    let mut total = 0u64;

    for (idx, layer) in spec.layers.iter().enumerate() {
        let collapse = |h: Option<usize>, w: Option<usize>| Error::InputTooSmall {
            layer: idx,
            layer_desc: layer.to_string(),
            height: h.map_or(0, |v| v as i64),
            width: w.map_or(0, |v| v as i64),
        };
        let (cost, next) = match (*layer, shape) {
            (
                Layer::Conv {
                    kernel,
                    stride,
                    padding,
                    in_channels,
                    out_channels,
                },
                Shape::Spatial { c, h, w },
            ) => {
                if kernel == 0 || stride == 0 {
                    return Err(bad_layer(idx, layer, "kernel and stride must be >= 1"));
                }
                if in_channels != c {
                    return Err(bad_layer(
                        idx,
                        layer,
                        &format!("expects {in_channels} input channels but receives {c}"),
                    ));
                }
                let (ho, wo) = (
                    window_out(h, kernel, stride, padding),
                    window_out(w, kernel, stride, padding),
                );
                let (Some(ho), Some(wo)) = (ho, wo) else {
                    return Err(collapse(ho, wo));
                };
                let macs = (kernel * kernel * in_channels * out_channels) as u64 * (ho * wo) as u64;
                (2 * macs, Shape::Spatial { c: out_channels, h: ho, w: wo })
            }
            (Layer::MaxPool { kernel, stride }, Shape::Spatial { c, h, w }) => {
                if kernel == 0 || stride == 0 {
                    return Err(bad_layer(idx, layer, "kernel and stride must be >= 1"));
                }
                let (ho, wo) = (window_out(h, kernel, stride, 0), window_out(w, kernel, stride, 0));
                let (Some(ho), Some(wo)) = (ho, wo) else {
                    return Err(collapse(ho, wo));
                };
                (0, Shape::Spatial { c, h: ho, w: wo })
            }
            (Layer::AdaptivePool { out_h, out_w }, Shape::Spatial { c, .. }) => {
                if out_h == 0 || out_w == 0 {
                    return Err(bad_layer(idx, layer, "output size must be >= 1"));
                }
                (0, Shape::Spatial { c, h: out_h, w: out_w })
            }
            (Layer::Conv { .. } | Layer::MaxPool { .. } | Layer::AdaptivePool { .. }, Shape::Flat(_)) => {
                return Err(bad_layer(idx, layer, "spatial layer after flatten"));
            }
            (Layer::FullyConnected { out_features }, s) => {
                (2 * (s.len() as u64) * out_features as u64, Shape::Flat(out_features))
            }
            (Layer::Flatten, s) => (0, Shape::Flat(s.len())),
        };
        shape = next;
        total += cost;
        let output = match shape {
            Shape::Spatial { c, h, w } => (c, h, w),
            Shape::Flat(n) => (n, 1, 1),
        };
        layers.push(LayerCost {
            layer: *layer,
            flops: cost,
            output,
        });
    }
    Ok(FlopsReport { total, layers })
}

fn bad_layer(idx: usize, layer: &Layer, msg: &str) -> Error {
    Error::InvalidArgument(format!("layer {idx} ({layer}): {msg}"))
}

pub fn flops(spec: &ConvNetSpec, input: InputSpec) -> Result<u64> {
    flops_report(spec, input).map(|r| r.total)
}

pub fn fps_at(total_flops: f64, device_throughput: f64) -> Result<f64> {
    if !(total_flops > 0.0 && device_throughput > 0.0) {
        return Err(Error::InvalidArgument(
            "FLOPs and device throughput must be > 0".into(),
        ));
    }
    Ok(device_throughput / total_flops)
}

/// Exactly [`REAL_TIME_FPS`] counts as real-time.
pub fn is_real_time(fps: f64) -> bool {
    fps >= REAL_TIME_FPS
}

/// VGG16 (13 3×3 convs, 5 max-pools, 4096-4096 classifier) with a 2-output
/// pitch/yaw head.
pub fn vgg16(in_channels: usize) -> ConvNetSpec {
    const PLAN: [&[usize]; 5] = [&[64, 64], &[128, 128], &[256, 256, 256], &[512, 512, 512], &[512, 512, 512]];
    let mut layers = Vec::new();
    let mut c = in_channels;
    for block in PLAN {
        for &out in block {
            layers.push(Layer::Conv {
                kernel: 3,
                stride: 1,
                padding: 1,
                in_channels: c,
                out_channels: out,
            });
            c = out;
        }
        layers.push(Layer::MaxPool { kernel: 2, stride: 2 });
    }
    layers.extend([
        Layer::Flatten,
        Layer::FullyConnected { out_features: 4096 },
        Layer::FullyConnected { out_features: 4096 },
        Layer::FullyConnected { out_features: 2 },
    ]);
    ConvNetSpec {
        name: "vgg16".into(),
        layers,
    }
}

/// VGG16 for `input`. When the standard network collapses at its final
/// pool, that pool is swapped for a 1×1 adaptive pool and the returned flag
/// is `true`. Earlier collapses are still reported as errors.
pub fn vgg16_for_input(input: InputSpec) -> Result<(ConvNetSpec, bool)> {
    let spec = vgg16(input.channels);
    let last_pool = spec
        .layers
        .iter()
        .rposition(|l| matches!(l, Layer::MaxPool { .. }))
        .expect("vgg16 has pooling layers");
    match flops_report(&spec, input) {
        Ok(_) => Ok((spec, false)),
        Err(Error::InputTooSmall { layer, .. }) if layer == last_pool => {
            let mut adapted = spec;
            adapted.layers[last_pool] = Layer::AdaptivePool { out_h: 1, out_w: 1 };
            adapted.name = "vgg16-adaptive".into();
            flops_report(&adapted, input)?;
            Ok((adapted, true))
        }
        Err(e) => Err(e),
    }
}

// ---------------------------------------------------------------------------
// Layer-list files.
//
// One layer per line; `#` starts a comment; blank lines are ignored.
//
//   conv kernel=3 stride=1 pad=1 in=3 out=64
//   maxpool kernel=2 stride=2
//   adaptivepool h=1 w=1
//   flatten
//   fc out=4096
//
// `stride` defaults to 1 for conv and to `kernel` for maxpool, `pad`
// defaults to 0. An optional `name <text>` line names the network.

pub fn spec_to_string(spec: &ConvNetSpec) -> String {
    let mut out = format!("name {}\n", spec.name);
    for l in &spec.layers {
        out.push_str(&l.to_string());
        out.push('\n');
    }
    out
}

pub fn spec_from_str(text: &str) -> Result<ConvNetSpec> {
    let mut name = String::from("custom");
    let mut layers = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |msg: String| Error::parse("network spec", format!("line {}: {msg}", lineno + 1));
        let mut words = line.split_whitespace();
        let kind = words.next().expect("non-empty line");
        if kind == "name" {
            name = words.collect::<Vec<_>>().join(" ");
            continue;
        }
        let mut args = std::collections::BTreeMap::new();
        for w in words {
            let (k, v) = w
                .split_once('=')
                .ok_or_else(|| err(format!("expected key=value, got '{w}'")))?;
            let v: usize = v
                .parse()
                .map_err(|_| err(format!("'{k}' must be a non-negative integer, got '{v}'")))?;
            if args.insert(k.to_string(), v).is_some() {
                return Err(err(format!("duplicate key '{k}'")));
            }
        }
        let mut take = |k: &str, default: Option<usize>| {
            args.remove(k)
                .or(default)
                .ok_or_else(|| err(format!("{kind}: missing '{k}'")))
        };
        let layer = match kind {
            "conv" => {
                let kernel = take("kernel", None)?;
                Layer::Conv {
                    kernel,
                    stride: take("stride", Some(1))?,
                    padding: take("pad", Some(0))?,
                    in_channels: take("in", None)?,
                    out_channels: take("out", None)?,
                }
            }
            "maxpool" => {
                let kernel = take("kernel", None)?;
                Layer::MaxPool {
                    kernel,
                    stride: take("stride", Some(kernel))?,
                }
            }
            "adaptivepool" => Layer::AdaptivePool {
                out_h: take("h", None)?,
                out_w: take("w", None)?,
            },
            "fc" => Layer::FullyConnected {
                out_features: take("out", None)?,
            },
            "flatten" => Layer::Flatten,
            other => return Err(err(format!("unknown layer kind '{other}'"))),
        };
        if let Some(k) = args.keys().next() {
            return Err(err(format!("{kind}: unexpected key '{k}'")));
        }
        layers.push(layer);
    }
    if layers.is_empty() {
        return Err(Error::parse("network spec", "no layers"));
    }
    Ok(ConvNetSpec { name, layers })
}

pub fn load_spec(path: &Path) -> Result<ConvNetSpec> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    spec_from_str(&text).map_err(|e| crate::simulate::with_path(e, path))
}
