//! Reference ENet-style layout used as the default device network.
//!
//! 30 modules on a 3x1024x2048 input:
//!
//! | #     | block                  | channels | spatial   |
//! |-------|------------------------|----------|-----------|
//! | 1     | initial (down)         | 3 -> 16  | 1/2       |
//! | 2     | 1.0 (down)             | 16 -> 64 | 1/4       |
//! | 3-6   | 1.1 - 1.4              | 64       | 1/4       |
//! | 7     | 2.0 (down)             | 64 -> 128| 1/8       |
//! | 8-15  | 2.1 - 2.8              | 128      | 1/8       |
//! | 16-23 | 3.1 - 3.8              | 128      | 1/8       |
//! | 24    | 4.0 (up, unpools 2.0)  | 128 -> 64| 1/4       |
//! | 25-26 | 4.1 - 4.2              | 64       | 1/4       |
//! | 27    | 5.0 (up, unpools 1.0)  | 64 -> 16 | 1/2       |
//! | 28-29 | 5.1 - 5.2              | 16       | 1/2       |
//! | 30    | full conv (up)         | 16 -> 20 | 1         |
//!
//! Stock ENet has 29 blocks when the initial block and the final full
//! convolution both count; the extra 5.2 keeps the decoder's regular blocks
//! symmetric with stage 4 and brings the count to 30.
//!
//! Bottlenecks use a 1x1 / 3x3 / 1x1 main branch with projection ratio 4.
//! Stage 2/3 interleave regular, dilated (2, 4, 8, 16) and asymmetric 5x1/1x5
//! blocks. Channel growth on a shortcut is a 1x1 projection in place of
//! ENet's zero padding, since branch outputs are summed.

use super::{load_architecture, Architecture, BottleneckModule, LayerSpec, Sampling, TensorShape};

/// The shipped reference config, as JSON.
pub const REFERENCE_CONFIG: &str = include_str!("../../assets/enet.json");

/// Parses [`REFERENCE_CONFIG`].
pub fn reference_architecture() -> Architecture {
    load_architecture(REFERENCE_CONFIG).expect("shipped reference config is valid")
}

#[derive(Debug, Clone, Copy)]
pub struct EnetOptions {
    pub input: TensorShape,
    pub classes: u64,
    pub bits_per_element: u64,
    pub pool_bits_per_element: u64,
}

impl Default for EnetOptions {
    fn default() -> Self {
        Self {
            input: TensorShape::new(3, 1024, 2048),
            classes: 20,
            bits_per_element: 32,
            // ceil(log2(2 * 2)) for the 2x2 pooling windows
            pool_bits_per_element: 2,
        }
    }
}

#[derive(Clone, Copy)]
enum Inner {
    Regular,
    Dilated(u64),
    Asymmetric(u64),
}

struct Builder {
    opts: EnetOptions,
    modules: Vec<BottleneckModule>,
}

impl Builder {
    fn push(&mut self, sampling: Sampling, main: Vec<LayerSpec>, skip: Vec<LayerSpec>) {
        let pool_bits = if sampling == Sampling::Down {
            self.opts.pool_bits_per_element
        } else {
            0
        };
        self.modules.push(BottleneckModule {
            id: self.modules.len() + 1,
            sampling,
            pool_bits_per_element: pool_bits,
            main_branch: main,
            skip_branch: skip,
        });
    }

    fn initial(&mut self, c_in: u64, c_out: u64) {
        self.push(
            Sampling::Down,
            vec![LayerSpec::conv(c_in, c_out, 3, 2, 1)],
            vec![LayerSpec::max_pool(c_in, 2, 2), LayerSpec::conv(c_in, c_out, 1, 1, 0)],
        );
    }

    fn regular(&mut self, c: u64, inner: Inner) {
        let p = c / 4;
        let mut main = vec![LayerSpec::conv(c, p, 1, 1, 0)];
        match inner {
            Inner::Regular => main.push(LayerSpec::conv(p, p, 3, 1, 1)),
            Inner::Dilated(d) => main.push(LayerSpec::conv(p, p, 3, 1, d).with_dilation(d)),
            Inner::Asymmetric(k) => {
                let half = k / 2;
                main.push(LayerSpec {
                    kw: 1,
                    pw: 0,
                    ..LayerSpec::conv(p, p, k, 1, half)
                });
                main.push(LayerSpec {
                    kh: 1,
                    ph: 0,
                    ..LayerSpec::conv(p, p, k, 1, half)
                });
            }
        }
        main.push(LayerSpec::conv(p, c, 1, 1, 0));
        self.push(Sampling::None, main, vec![]);
    }

    fn down(&mut self, c_in: u64, c_out: u64) {
        let p = c_in / 4;
        self.push(
            Sampling::Down,
            vec![
                LayerSpec::conv(c_in, p, 2, 2, 0),
                LayerSpec::conv(p, p, 3, 1, 1),
                LayerSpec::conv(p, c_out, 1, 1, 0),
            ],
            vec![LayerSpec::max_pool(c_in, 2, 2), LayerSpec::conv(c_in, c_out, 1, 1, 0)],
        );
    }

    fn up(&mut self, c_in: u64, c_out: u64) {
        let p = c_in / 4;
        self.push(
            Sampling::Up,
            vec![
                LayerSpec::conv(c_in, p, 1, 1, 0),
                LayerSpec::transpose(p, p, 3, 2, 1, 1),
                LayerSpec::conv(p, c_out, 1, 1, 0),
            ],
            vec![LayerSpec::conv(c_in, c_out, 1, 1, 0), LayerSpec::max_unpool(c_out, 2, 2)],
        );
    }

    fn full_conv(&mut self, c_in: u64, classes: u64) {
        self.push(
            Sampling::Up,
            vec![LayerSpec::transpose(c_in, classes, 3, 2, 1, 1)],
            vec![LayerSpec::transpose(c_in, classes, 1, 2, 0, 1)],
        );
    }
}

impl EnetOptions {
    pub fn build(self) -> Architecture {
        let mut b = Builder {
            opts: self,
            modules: Vec::with_capacity(30),
        };
        b.initial(self.input.channels, 16);
        b.down(16, 64);
        for _ in 0..4 {
            b.regular(64, Inner::Regular);
        }
        b.down(64, 128);
        for _stage in 0..2 {
            for inner in [
                Inner::Regular,
                Inner::Dilated(2),
                Inner::Asymmetric(5),
                Inner::Dilated(4),
                Inner::Regular,
                Inner::Dilated(8),
                Inner::Asymmetric(5),
                Inner::Dilated(16),
            ] {
                b.regular(128, inner);
            }
        }
        b.up(128, 64);
        b.regular(64, Inner::Regular);
        b.regular(64, Inner::Regular);
        b.up(64, 16);
        b.regular(16, Inner::Regular);
        b.regular(16, Inner::Regular);
        b.full_conv(16, self.classes);
        Architecture::new(self.input, self.bits_per_element, b.modules)
            .expect("ENet layout is self-consistent")
    }
}

/// Four-module encoder/decoder with the same block types as the reference
/// layout: initial block (3 -> 8, 1/2), downsampling bottleneck (8 -> 16,
/// 1/4), upsampling bottleneck that unpools it (16 -> 8, 1/2) and a full
/// convolution back to `classes` channels. Small enough for exhaustive
/// oracles; the smallest payload is the 1/4-resolution activation.
pub fn toy_architecture(input: TensorShape, classes: u64) -> Architecture {
    let mut b = Builder {
        opts: EnetOptions {
            input,
            classes,
            ..EnetOptions::default()
        },
        modules: Vec::with_capacity(4),
    };
    b.initial(input.channels, 8);
    b.down(8, 16);
    b.up(16, 8);
    b.full_conv(8, classes);
    Architecture::new(input, b.opts.bits_per_element, b.modules).expect("toy layout is self-consistent")
}

/// Serializes the default [`EnetOptions`] layout.
pub fn reference_config_json() -> String {
    let mut text = EnetOptions::default().build().to_json();
    text.push('\n');
    text
}
