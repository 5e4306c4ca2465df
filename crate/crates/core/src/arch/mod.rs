//! Structural description of bottleneck-module (BM) segmentation networks and
//! the per-cut workload / payload profile derived from it.
//!
//! A network is an ordered list of BMs. Each BM has a main branch and an
//! optional skip branch whose outputs are summed, so both must produce the
//! same shape. An empty skip branch is the identity shortcut. The device may
//! hand over to the server only at BM boundaries: cut `l` means BMs `1..=l`
//! ran locally (cut 0 ships the raw input).

mod enet;
mod layer;
mod profile;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use enet::{reference_architecture, reference_config_json, toy_architecture, EnetOptions, REFERENCE_CONFIG};
pub use layer::{
    conv_output_dim, layer_flops, transpose_output_dim, unpool_output_dim, Axis, LayerKind,
    LayerSpec, TensorShape,
};
pub use profile::{propagate, CutProfile};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ArchError {
    #[error("layer produces non-positive {axis} extent ({value})")]
    NonPositiveOutput { axis: Axis, value: i128 },
    #[error("layer expects {expected} input channels, got {found}")]
    ChannelMismatch { expected: u64, found: u64 },
    #[error("invalid layer: {0}")]
    InvalidLayer(String),
    #[error("module {module}: branch outputs differ (main {main}, skip {skip})")]
    ShapeMismatch {
        module: usize,
        main: TensorShape,
        skip: TensorShape,
    },
    #[error("module {module}: {reason}")]
    Pairing { module: usize, reason: String },
    #[error("module {module}: {source}")]
    InModule {
        module: usize,
        #[source]
        source: Box<ArchError>,
    },
    #[error("validation failed{}: {reason}", module.map(|m| format!(" at module {m}")).unwrap_or_default())]
    Validation { module: Option<usize>, reason: String },
    #[error("cannot parse architecture config: {0}")]
    Parse(String),
}

impl ArchError {
    fn validation(module: Option<usize>, reason: impl Into<String>) -> Self {
        ArchError::Validation {
            module,
            reason: reason.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sampling {
    None,
    Down,
    Up,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BottleneckModule {
    pub id: usize,
    pub sampling: Sampling,
    /// Bits stored per pooled element so a later unpooling can restore positions.
    #[serde(default)]
    pub pool_bits_per_element: u64,
    pub main_branch: Vec<LayerSpec>,
    #[serde(default)]
    pub skip_branch: Vec<LayerSpec>,
}

/// Shapes observed while running a module forward.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct ModuleTrace {
    pub output: TensorShape,
    pub flops: u64,
    /// Output element counts of every max-pooling layer in the module.
    pub pooled_elements: u64,
    /// Input shape of the first max-pooling layer, if any.
    pub pool_input: Option<TensorShape>,
    /// Output shape of the first max-unpooling layer, if any.
    pub unpool_output: Option<TensorShape>,
}

impl BottleneckModule {
    pub fn has_layer(&self, kind: LayerKind) -> bool {
        self.main_branch
            .iter()
            .chain(&self.skip_branch)
            .any(|l| l.kind == kind)
    }

    pub(crate) fn trace(&self, input: TensorShape) -> Result<ModuleTrace, ArchError> {
        let wrap = |e: ArchError| ArchError::InModule {
            module: self.id,
            source: Box::new(e),
        };
        let mut trace = ModuleTrace {
            output: input,
            flops: 0,
            pooled_elements: 0,
            pool_input: None,
            unpool_output: None,
        };
        let mut run = |branch: &[LayerSpec]| -> Result<TensorShape, ArchError> {
            let mut shape = input;
            for layer in branch {
                layer.validate().map_err(wrap)?;
                trace.flops += layer_flops(layer, shape).map_err(wrap)?;
                let next = layer.output_shape(shape).map_err(wrap)?;
                match layer.kind {
                    LayerKind::MaxPool => {
                        trace.pooled_elements += next.elements();
                        trace.pool_input.get_or_insert(shape);
                    }
                    LayerKind::MaxUnpool => {
                        trace.unpool_output.get_or_insert(next);
                    }
                    _ => {}
                }
                shape = next;
            }
            Ok(shape)
        };
        if self.main_branch.is_empty() {
            return Err(ArchError::validation(Some(self.id), "main branch is empty"));
        }
        let main = run(&self.main_branch)?;
        let skip = run(&self.skip_branch)?;
        if main != skip {
            return Err(ArchError::ShapeMismatch {
                module: self.id,
                main,
                skip,
            });
        }
        trace.output = main;
        Ok(trace)
    }
}

fn default_bits() -> u64 {
    32
}

/// A validated stack of bottleneck modules.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawArchitecture", into = "RawArchitecture")]
pub struct Architecture {
    bits_per_element: u64,
    input: TensorShape,
    modules: Vec<BottleneckModule>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct RawArchitecture {
    #[serde(default = "default_bits")]
    bits_per_element: u64,
    input: TensorShape,
    modules: Vec<BottleneckModule>,
}

impl TryFrom<RawArchitecture> for Architecture {
    type Error = ArchError;

    fn try_from(raw: RawArchitecture) -> Result<Self, ArchError> {
        Architecture::new(raw.input, raw.bits_per_element, raw.modules)
    }
}

impl From<Architecture> for RawArchitecture {
    fn from(arch: Architecture) -> Self {
        RawArchitecture {
            bits_per_element: arch.bits_per_element,
            input: arch.input,
            modules: arch.modules,
        }
    }
}

impl Architecture {
    /// Builds and validates an architecture. A module list may be empty here;
    /// [`load_architecture`] is stricter.
    pub fn new(
        input: TensorShape,
        bits_per_element: u64,
        modules: Vec<BottleneckModule>,
    ) -> Result<Self, ArchError> {
        let arch = Self {
            bits_per_element,
            input,
            modules,
        };
        arch.validate()?;
        Ok(arch)
    }

    pub fn bits_per_element(&self) -> u64 {
        self.bits_per_element
    }

    pub fn input_shape(&self) -> TensorShape {
        self.input
    }

    pub fn modules(&self) -> &[BottleneckModule] {
        &self.modules
    }

    /// Number of bottleneck modules, `L`.
    pub fn len(&self) -> usize {
        self.modules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modules.is_empty()
    }

    pub(crate) fn traces(&self) -> Result<Vec<ModuleTrace>, ArchError> {
        let mut shape = self.input;
        let mut out = Vec::with_capacity(self.modules.len());
        for module in &self.modules {
            let trace = module.trace(shape)?;
            shape = trace.output;
            out.push(trace);
        }
        Ok(out)
    }

    /// LIFO pairing of unpooling modules with earlier pooling modules. Entry
    /// `j` holds the (0-based) module index of the unpooling partner of module
    /// `j`, if any.
    pub(crate) fn pool_partners(&self, traces: &[ModuleTrace]) -> Result<Vec<Option<usize>>, ArchError> {
        let mut partners = vec![None; self.modules.len()];
        let mut open: Vec<usize> = Vec::new();
        for (j, module) in self.modules.iter().enumerate() {
            let pools = module.has_layer(LayerKind::MaxPool);
            let unpools = module.has_layer(LayerKind::MaxUnpool);
            if pools && module.sampling != Sampling::Down {
                return Err(ArchError::Pairing {
                    module: module.id,
                    reason: "max-pooling outside a down-sampling module".into(),
                });
            }
            if unpools {
                if module.sampling != Sampling::Up {
                    return Err(ArchError::Pairing {
                        module: module.id,
                        reason: "max-unpooling outside an up-sampling module".into(),
                    });
                }
                let Some(down) = open.pop() else {
                    return Err(ArchError::Pairing {
                        module: module.id,
                        reason: "no earlier max-pooling module left to pair with".into(),
                    });
                };
                let restored = traces[j].unpool_output.map(|s| s.spatial());
                let pooled_from = traces[down].pool_input.map(|s| s.spatial());
                if restored != pooled_from {
                    return Err(ArchError::Pairing {
                        module: module.id,
                        reason: format!(
                            "unpooling restores {:?} but module {} pooled from {:?}",
                            restored, self.modules[down].id, pooled_from
                        ),
                    });
                }
                partners[down] = Some(j);
            }
            if pools {
                open.push(j);
            }
        }
        Ok(partners)
    }

    fn validate(&self) -> Result<(), ArchError> {
        if self.bits_per_element == 0 {
            return Err(ArchError::validation(None, "bits_per_element must be positive"));
        }
        let TensorShape {
            channels,
            height,
            width,
        } = self.input;
        if channels == 0 || height == 0 || width == 0 {
            return Err(ArchError::validation(None, "input dims must be positive"));
        }
        let traces = self.traces()?;
        let mut input = self.input;
        let (mut downs, mut ups) = (0usize, 0usize);
        for (module, trace) in self.modules.iter().zip(&traces) {
            let (hi, wi) = input.spatial();
            let (ho, wo) = trace.output.spatial();
            let ok = match module.sampling {
                Sampling::Down => {
                    downs += 1;
                    ho < hi && wo < wi
                }
                Sampling::Up => {
                    ups += 1;
                    ho > hi && wo > wi
                }
                Sampling::None => ho == hi && wo == wi,
            };
            if !ok {
                return Err(ArchError::validation(
                    Some(module.id),
                    format!(
                        "{:?} module maps spatial {hi}x{wi} to {ho}x{wo}",
                        module.sampling
                    ),
                ));
            }
            input = trace.output;
        }
        if downs != ups {
            return Err(ArchError::validation(
                None,
                format!("{downs} down-sampling modules but {ups} up-sampling modules"),
            ));
        }
        if input.spatial() != self.input.spatial() {
            return Err(ArchError::validation(
                None,
                format!("output spatial dims {:?} differ from input {:?}", input.spatial(), self.input.spatial()),
            ));
        }
        self.pool_partners(&traces)?;
        Ok(())
    }

    pub fn output_shape(&self) -> TensorShape {
        self.traces()
            .ok()
            .and_then(|t| t.last().map(|t| t.output))
            .unwrap_or(self.input)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("architecture serializes")
    }
}

/// Parses and validates a JSON architecture config. Rejects empty module lists.
pub fn load_architecture(config_text: &str) -> Result<Architecture, ArchError> {
    let raw: RawArchitecture =
        serde_json::from_str(config_text).map_err(|e| ArchError::Parse(e.to_string()))?;
    if raw.modules.is_empty() {
        return Err(ArchError::validation(None, "module list is empty"));
    }
    Architecture::try_from(raw)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn regular(id: usize, c: u64) -> BottleneckModule {
        BottleneckModule {
            id,
            sampling: Sampling::None,
            pool_bits_per_element: 0,
            main_branch: vec![LayerSpec::conv(c, c, 3, 1, 1)],
            skip_branch: vec![],
        }
    }

    fn down(id: usize, c: u64) -> BottleneckModule {
        BottleneckModule {
            id,
            sampling: Sampling::Down,
            pool_bits_per_element: 2,
            main_branch: vec![LayerSpec::conv(c, c, 2, 2, 0)],
            skip_branch: vec![LayerSpec::max_pool(c, 2, 2)],
        }
    }

    fn up(id: usize, c: u64) -> BottleneckModule {
        BottleneckModule {
            id,
            sampling: Sampling::Up,
            pool_bits_per_element: 0,
            main_branch: vec![LayerSpec::transpose(c, c, 3, 2, 1, 1)],
            skip_branch: vec![LayerSpec::max_unpool(c, 2, 2)],
        }
    }

    #[test]
    fn toy_roundtrip_validates() {
        let arch = Architecture::new(
            TensorShape::new(4, 16, 16),
            32,
            vec![down(1, 4), regular(2, 4), up(3, 4)],
        )
        .unwrap();
        assert_eq!(arch.len(), 3);
        assert_eq!(arch.output_shape(), TensorShape::new(4, 16, 16));
    }

    #[test]
    fn branch_mismatch() {
        let mut m = regular(1, 4);
        m.skip_branch = vec![LayerSpec::conv(4, 8, 1, 1, 0)];
        let err = Architecture::new(TensorShape::new(4, 8, 8), 32, vec![m]).unwrap_err();
        assert!(matches!(err, ArchError::ShapeMismatch { module: 1, .. }));
    }

    #[test]
    fn unbalanced_sampling() {
        let err = Architecture::new(
            TensorShape::new(4, 16, 16),
            32,
            vec![down(1, 4), down(2, 4), up(3, 4)],
        )
        .unwrap_err();
        assert!(matches!(err, ArchError::Validation { .. }));
    }

    #[test]
    fn unpool_without_pool() {
        let mut d = down(1, 4);
        d.skip_branch = vec![LayerSpec::conv(4, 4, 2, 2, 0)];
        let err = Architecture::new(TensorShape::new(4, 16, 16), 32, vec![d, up(2, 4)]).unwrap_err();
        assert!(matches!(err, ArchError::Pairing { module: 2, .. }));
    }

    #[test]
    fn load_rejects_empty() {
        let text = r#"{"bits_per_element":32,"input":{"channels":3,"height":8,"width":8},"modules":[]}"#;
        assert!(matches!(load_architecture(text), Err(ArchError::Validation { .. })));
        assert!(matches!(load_architecture("{"), Err(ArchError::Parse(_))));
    }

    #[test]
    fn load_reports_module_id() {
        let text = r#"{
            "bits_per_element": 32,
            "input": {"channels": 4, "height": 8, "width": 8},
            "modules": [
                {"id": 7, "sampling": "none", "main_branch": [
                    {"kind": "conv", "c_in": 4, "c_out": 4, "kw": 3, "kh": 3, "pw": 0, "ph": 0}
                ]}
            ]
        }"#;
        match load_architecture(text) {
            Err(ArchError::ShapeMismatch { module, .. }) => assert_eq!(module, 7),
            other => panic!("unexpected {other:?}"),
        }
    }
}
