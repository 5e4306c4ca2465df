use serde::{Deserialize, Serialize};

use super::ArchError;

/// Layer kinds with a closed-form output size and workload.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LayerKind {
    Conv,
    TransposeConv,
    MaxPool,
    MaxUnpool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Width,
    Height,
}

impl std::fmt::Display for Axis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Axis::Width => f.write_str("width"),
            Axis::Height => f.write_str("height"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TensorShape {
    pub channels: u64,
    pub height: u64,
    pub width: u64,
}

impl TensorShape {
    pub const fn new(channels: u64, height: u64, width: u64) -> Self {
        Self {
            channels,
            height,
            width,
        }
    }

    pub fn elements(&self) -> u64 {
        self.channels * self.height * self.width
    }

    pub fn spatial(&self) -> (u64, u64) {
        (self.height, self.width)
    }
}

impl std::fmt::Display for TensorShape {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}x{}x{}", self.channels, self.height, self.width)
    }
}

fn one() -> u64 {
    1
}

/// A convolution or pooling layer. Field names follow the usual
/// `C_in, C_out, K, P, S, D, P_o` parameterization, per spatial axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LayerSpec {
    pub kind: LayerKind,
    pub c_in: u64,
    pub c_out: u64,
    pub kw: u64,
    pub kh: u64,
    #[serde(default)]
    pub pw: u64,
    #[serde(default)]
    pub ph: u64,
    #[serde(default = "one")]
    pub sw: u64,
    #[serde(default = "one")]
    pub sh: u64,
    #[serde(default = "one")]
    pub dw: u64,
    #[serde(default = "one")]
    pub dh: u64,
    #[serde(default)]
    pub pwo: u64,
    #[serde(default)]
    pub pho: u64,
}

impl LayerSpec {
    /// Square-kernel layer with unit dilation and no output padding.
    pub fn square(kind: LayerKind, c_in: u64, c_out: u64, kernel: u64, stride: u64, pad: u64) -> Self {
        Self {
            kind,
            c_in,
            c_out,
            kw: kernel,
            kh: kernel,
            pw: pad,
            ph: pad,
            sw: stride,
            sh: stride,
            dw: 1,
            dh: 1,
            pwo: 0,
            pho: 0,
        }
    }

    pub fn conv(c_in: u64, c_out: u64, kernel: u64, stride: u64, pad: u64) -> Self {
        Self::square(LayerKind::Conv, c_in, c_out, kernel, stride, pad)
    }

    pub fn transpose(c_in: u64, c_out: u64, kernel: u64, stride: u64, pad: u64, out_pad: u64) -> Self {
        Self {
            pwo: out_pad,
            pho: out_pad,
            ..Self::square(LayerKind::TransposeConv, c_in, c_out, kernel, stride, pad)
        }
    }

    pub fn max_pool(channels: u64, kernel: u64, stride: u64) -> Self {
        Self::square(LayerKind::MaxPool, channels, channels, kernel, stride, 0)
    }

    pub fn max_unpool(channels: u64, kernel: u64, stride: u64) -> Self {
        Self::square(LayerKind::MaxUnpool, channels, channels, kernel, stride, 0)
    }

    pub fn with_dilation(mut self, dilation: u64) -> Self {
        self.dw = dilation;
        self.dh = dilation;
        self
    }

    /// Kernel, padding, stride, dilation and output padding along one axis.
    fn axis_params(&self, axis: Axis) -> (u64, u64, u64, u64, u64) {
        match axis {
            Axis::Width => (self.kw, self.pw, self.sw, self.dw, self.pwo),
            Axis::Height => (self.kh, self.ph, self.sh, self.dh, self.pho),
        }
    }

    /// Checks the structural invariants that do not depend on the input.
    pub fn validate(&self) -> Result<(), ArchError> {
        let bad = |reason: &str| Err(ArchError::InvalidLayer(reason.to_string()));
        if self.c_in == 0 || self.c_out == 0 {
            return bad("channel counts must be positive");
        }
        if self.kw == 0 || self.kh == 0 {
            return bad("kernel dims must be >= 1");
        }
        if self.sw == 0 || self.sh == 0 {
            return bad("stride dims must be >= 1");
        }
        if self.dw == 0 || self.dh == 0 {
            return bad("dilation dims must be >= 1");
        }
        if self.kind != LayerKind::TransposeConv && (self.pwo != 0 || self.pho != 0) {
            return bad("output padding is only valid for transpose convolutions");
        }
        if matches!(self.kind, LayerKind::MaxPool | LayerKind::MaxUnpool) && self.c_in != self.c_out {
            return bad("pooling layers must preserve the channel count");
        }
        Ok(())
    }

    /// Output extent along `axis` for an input extent `x_in`.
    pub fn output_dim(&self, x_in: u64, axis: Axis) -> Result<u64, ArchError> {
        match self.kind {
            LayerKind::Conv | LayerKind::MaxPool => conv_output_dim(x_in, self, axis),
            LayerKind::TransposeConv => transpose_output_dim(x_in, self, axis),
            LayerKind::MaxUnpool => unpool_output_dim(x_in, self, axis),
        }
    }

    pub fn output_shape(&self, input: TensorShape) -> Result<TensorShape, ArchError> {
        if input.channels != self.c_in {
            return Err(ArchError::ChannelMismatch {
                expected: self.c_in,
                found: input.channels,
            });
        }
        Ok(TensorShape {
            channels: self.c_out,
            height: self.output_dim(input.height, Axis::Height)?,
            width: self.output_dim(input.width, Axis::Width)?,
        })
    }
}

fn positive(value: i128, axis: Axis) -> Result<u64, ArchError> {
    if value < 1 {
        Err(ArchError::NonPositiveOutput { axis, value })
    } else {
        Ok(value as u64)
    }
}

/// `floor((x + 2P - D(K-1) - 1) / S + 1)` for convolution and max-pooling.
pub fn conv_output_dim(x_in: u64, layer: &LayerSpec, axis: Axis) -> Result<u64, ArchError> {
    let (k, p, s, d, _) = layer.axis_params(axis);
    let numerator = x_in as i128 + 2 * p as i128 - d as i128 * (k as i128 - 1) - 1;
    positive(numerator.div_euclid(s as i128) + 1, axis)
}

/// `(x - 1)S - 2P + D(K-1) + P_o + 1` for transposed convolution.
pub fn transpose_output_dim(x_in: u64, layer: &LayerSpec, axis: Axis) -> Result<u64, ArchError> {
    let (k, p, s, d, po) = layer.axis_params(axis);
    let x = x_in as i128;
    positive(
        (x - 1) * s as i128 - 2 * p as i128 + d as i128 * (k as i128 - 1) + po as i128 + 1,
        axis,
    )
}

/// `(x - 1)S - 2P + K` for max-unpooling.
pub fn unpool_output_dim(x_in: u64, layer: &LayerSpec, axis: Axis) -> Result<u64, ArchError> {
    let (k, p, s, _, _) = layer.axis_params(axis);
    let x = x_in as i128;
    positive((x - 1) * s as i128 - 2 * p as i128 + k as i128, axis)
}

/// Floating-point operation count of `layer` applied to `input`.
///
/// Convolutions (plain and transposed) cost `2 C_in C_out K_w K_h W_out H_out`,
/// max-pooling costs `(K_w K_h - 1) C_out W_out H_out` comparisons, and
/// max-unpooling is treated as free.
pub fn layer_flops(layer: &LayerSpec, input: TensorShape) -> Result<u64, ArchError> {
    let out = layer.output_shape(input)?;
    let spatial = out.width * out.height;
    Ok(match layer.kind {
        LayerKind::Conv | LayerKind::TransposeConv => {
            2 * layer.c_in * layer.c_out * layer.kw * layer.kh * spatial
        }
        LayerKind::MaxPool => (layer.kw * layer.kh - 1) * layer.c_out * spatial,
        LayerKind::MaxUnpool => 0,
    })
}
