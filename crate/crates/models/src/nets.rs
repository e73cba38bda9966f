//! The seven architectures assembled from the differentiable kernels.
//!
//! Shared building blocks: a four-stage conv-conv-pool encoder for full
//! images, a lighter three-stage frame encoder feeding the bidirectional
//! LSTM, a dense classification head, and the upsampling decoder that
//! produces attention maps.

use rand_chacha::ChaCha8Rng;

use numeric_core::graph::Var;
use numeric_core::lstm::BiLstm;
use numeric_core::ops;
use numeric_core::rng::{derive_seed, glorot_uniform, seeded_rng};
use numeric_core::{NdArray, NumericError};

use crate::config::{ArchitectureId, ModelConfig};
use crate::error::ModelError;
use crate::inputs::StudyInputs;

const SALT_INIT: u64 = 0x4D0D_E1;

/// Output of one forward pass. Probabilities are the softmax of the
/// logits; the attention map is present only for decoder architectures.
pub struct Forward {
    pub logits: Var,
    pub probs: Var,
    pub attention: Option<Var>,
}

pub trait Net {
    fn forward(&self, inputs: &StudyInputs) -> Result<Forward, ModelError>;
    /// Parameters in a stable order, named for persistence.
    fn params(&self) -> Vec<(String, Var)>;
    fn arch(&self) -> ArchitectureId;
}

fn conv_kernel(c_out: usize, c_in: usize, rng: &mut ChaCha8Rng) -> Var {
    // 3x3 kernels throughout; glorot fans include the receptive field.
    Var::leaf(glorot_uniform(
        &[c_out, c_in, 3, 3],
        c_in * 9,
        c_out * 9,
        rng,
    ))
}

fn dense(out_dim: usize, in_dim: usize, rng: &mut ChaCha8Rng) -> (Var, Var) {
    let w = Var::leaf(glorot_uniform(&[out_dim, in_dim], in_dim, out_dim, rng));
    let b = Var::leaf(NdArray::zeros(&[out_dim]));
    (w, b)
}

fn require<'a, T>(
    value: &'a Option<T>,
    inputs: &StudyInputs,
    modality: &'static str,
    arch: ArchitectureId,
) -> Result<&'a T, ModelError> {
    value.as_ref().ok_or_else(|| ModelError::MissingModality {
        study_id: inputs.study_id.clone(),
        modality,
        arch: arch.name(),
    })
}

/// conv3x3 -> relu -> conv3x3 -> relu -> maxpool2.
struct ConvBlock {
    k1: Var,
    k2: Var,
}

impl ConvBlock {
    fn init(c_in: usize, c_out: usize, rng: &mut ChaCha8Rng) -> ConvBlock {
        ConvBlock {
            k1: conv_kernel(c_out, c_in, rng),
            k2: conv_kernel(c_out, c_out, rng),
        }
    }

    fn forward(&self, x: &Var) -> Result<Var, NumericError> {
        let a = ops::relu(&ops::conv2d(x, &self.k1, 1, 1)?);
        let b = ops::relu(&ops::conv2d(&a, &self.k2, 1, 1)?);
        ops::max_pool2d(&b, 2)
    }

    fn params(&self, prefix: &str, out: &mut Vec<(String, Var)>) {
        out.push((format!("{prefix}.conv1"), self.k1.clone()));
        out.push((format!("{prefix}.conv2"), self.k2.clone()));
    }
}

/// Four conv-conv-pool stages; spatial size shrinks by 16.
struct Encoder {
    blocks: Vec<ConvBlock>,
}

impl Encoder {
    fn init(channels: &[usize; 4], rng: &mut ChaCha8Rng) -> Encoder {
        let mut blocks = Vec::with_capacity(4);
        let mut c_in = 1;
        for &c_out in channels {
            blocks.push(ConvBlock::init(c_in, c_out, rng));
            c_in = c_out;
        }
        Encoder { blocks }
    }

    fn forward(&self, x: &Var) -> Result<Var, NumericError> {
        let mut cur = x.clone();
        for block in &self.blocks {
            cur = block.forward(&cur)?;
        }
        Ok(cur)
    }

    fn params(&self, prefix: &str, out: &mut Vec<(String, Var)>) {
        for (i, block) in self.blocks.iter().enumerate() {
            block.params(&format!("{prefix}.block{}", i + 1), out);
        }
    }
}

/// Dense head: feature -> hidden -> relu -> logits.
struct ClassHead {
    w1: Var,
    b1: Var,
    w2: Var,
    b2: Var,
}

impl ClassHead {
    fn init(in_dim: usize, hidden: usize, rng: &mut ChaCha8Rng) -> ClassHead {
        let (w1, b1) = dense(hidden, in_dim, rng);
        let (w2, b2) = dense(3, hidden, rng);
        ClassHead { w1, b1, w2, b2 }
    }

    fn forward(&self, feature: &Var) -> Result<Var, NumericError> {
        let hidden = ops::relu(&ops::affine(feature, &self.w1, &self.b1)?);
        ops::affine(&hidden, &self.w2, &self.b2)
    }

    fn params(&self, prefix: &str, out: &mut Vec<(String, Var)>) {
        out.push((format!("{prefix}.w1"), self.w1.clone()));
        out.push((format!("{prefix}.b1"), self.b1.clone()));
        out.push((format!("{prefix}.w2"), self.w2.clone()));
        out.push((format!("{prefix}.b2"), self.b2.clone()));
    }
}

/// Per-frame encoder: three conv-pool stages, global average pooling,
/// then a linear map to the LSTM input width.
struct FrameEncoder {
    convs: Vec<Var>,
    proj_w: Var,
    proj_b: Var,
}

impl FrameEncoder {
    fn init(channels: &[usize; 4], feature: usize, rng: &mut ChaCha8Rng) -> FrameEncoder {
        let mut convs = Vec::with_capacity(3);
        let mut c_in = 1;
        for &c_out in &channels[..3] {
            convs.push(conv_kernel(c_out, c_in, rng));
            c_in = c_out;
        }
        let (proj_w, proj_b) = dense(feature, channels[2], rng);
        FrameEncoder {
            convs,
            proj_w,
            proj_b,
        }
    }

    fn forward(&self, frame: &Var) -> Result<Var, NumericError> {
        let mut cur = frame.clone();
        for kernel in &self.convs {
            let a = ops::relu(&ops::conv2d(&cur, kernel, 1, 1)?);
            cur = ops::max_pool2d(&a, 2)?;
        }
        let pooled = ops::global_avg_pool(&cur)?;
        ops::affine(&pooled, &self.proj_w, &self.proj_b)
    }

    fn params(&self, prefix: &str, out: &mut Vec<(String, Var)>) {
        for (i, k) in self.convs.iter().enumerate() {
            out.push((format!("{prefix}.conv{}", i + 1), k.clone()));
        }
        out.push((format!("{prefix}.proj_w"), self.proj_w.clone()));
        out.push((format!("{prefix}.proj_b"), self.proj_b.clone()));
    }
}

/// Upsample(x2) + conv3x3 stages back to input resolution, ending in a
/// single sigmoid channel.
struct Decoder {
    convs: Vec<Var>,
}

impl Decoder {
    fn init(channels: &[usize; 4], rng: &mut ChaCha8Rng) -> Decoder {
        let widths = [channels[3], channels[2], channels[1], channels[0], 1];
        let convs = (0..4)
            .map(|i| conv_kernel(widths[i + 1], widths[i], rng))
            .collect();
        Decoder { convs }
    }

    /// Returns the attention map as [S, S] with values in (0, 1).
    fn forward(&self, bottleneck: &Var) -> Result<Var, NumericError> {
        let mut cur = bottleneck.clone();
        for (i, kernel) in self.convs.iter().enumerate() {
            let up = ops::upsample_nearest(&cur, 2)?;
            let conv = ops::conv2d(&up, kernel, 1, 1)?;
            cur = if i + 1 < self.convs.len() {
                ops::relu(&conv)
            } else {
                ops::sigmoid(&conv)
            };
        }
        let shape = cur.shape();
        ops::reshape(&cur, &[shape[1], shape[2]])
    }

    fn params(&self, prefix: &str, out: &mut Vec<(String, Var)>) {
        for (i, k) in self.convs.iter().enumerate() {
            out.push((format!("{prefix}.conv{}", i + 1), k.clone()));
        }
    }
}

/// Text branch: embedding -> dense -> relu.
struct TextBranch {
    w: Var,
    b: Var,
}

impl TextBranch {
    fn init(text_dim: usize, feature: usize, rng: &mut ChaCha8Rng) -> TextBranch {
        let (w, b) = dense(feature, text_dim, rng);
        TextBranch { w, b }
    }

    fn forward(&self, text: &Var) -> Result<Var, NumericError> {
        Ok(ops::relu(&ops::affine(text, &self.w, &self.b)?))
    }

    fn params(&self, prefix: &str, out: &mut Vec<(String, Var)>) {
        out.push((format!("{prefix}.w"), self.w.clone()));
        out.push((format!("{prefix}.b"), self.b.clone()));
    }
}

fn finish(logits: Var, attention: Option<Var>) -> Result<Forward, NumericError> {
    let probs = ops::softmax(&logits)?;
    Ok(Forward {
        logits,
        probs,
        attention,
    })
}

/// Image (or static heatmap) classifier: encoder, global average pool,
/// dense head.
struct EncoderClassifier {
    arch: ArchitectureId,
    enc: Encoder,
    head: ClassHead,
}

impl Net for EncoderClassifier {
    fn forward(&self, inputs: &StudyInputs) -> Result<Forward, ModelError> {
        let grid = match self.arch {
            ArchitectureId::HmapStatic => {
                require(&inputs.static_map, inputs, "static heatmap", self.arch)?
            }
            _ => require(&inputs.image, inputs, "image", self.arch)?,
        };
        let x = Var::leaf(grid.clone());
        let feat = ops::global_avg_pool(&self.enc.forward(&x)?)?;
        let logits = self.head.forward(&feat)?;
        Ok(finish(logits, None)?)
    }

    fn params(&self) -> Vec<(String, Var)> {
        let mut out = Vec::new();
        self.enc.params("enc", &mut out);
        self.head.params("head", &mut out);
        out
    }

    fn arch(&self) -> ArchitectureId {
        self.arch
    }
}

/// CNN-RNN over the temporal heatmap sequence.
struct TemporalClassifier {
    fenc: FrameEncoder,
    lstm: BiLstm,
    head_w: Var,
    head_b: Var,
}

impl Net for TemporalClassifier {
    fn forward(&self, inputs: &StudyInputs) -> Result<Forward, ModelError> {
        let frames = require(&inputs.frames, inputs, "temporal frames", self.arch())?;
        if frames.is_empty() {
            return Err(NumericError::empty("temporal sequence has no frames").into());
        }
        let encoded: Vec<Var> = frames
            .iter()
            .map(|f| self.fenc.forward(&Var::leaf(f.clone())))
            .collect::<Result<_, _>>()?;
        let seq_feat = self.lstm.run(&encoded)?;
        let logits = ops::affine(&seq_feat, &self.head_w, &self.head_b)?;
        Ok(finish(logits, None)?)
    }

    fn params(&self) -> Vec<(String, Var)> {
        let mut out = Vec::new();
        self.fenc.params("frame_enc", &mut out);
        out.extend(self.lstm.params("lstm"));
        out.push(("head.w".into(), self.head_w.clone()));
        out.push(("head.b".into(), self.head_b.clone()));
        out
    }

    fn arch(&self) -> ArchitectureId {
        ArchitectureId::HmapTemporal
    }
}

/// Sentence-embedding classifier.
struct TextClassifier {
    head: ClassHead,
}

impl Net for TextClassifier {
    fn forward(&self, inputs: &StudyInputs) -> Result<Forward, ModelError> {
        let text = require(&inputs.text, inputs, "sentence embedding", self.arch())?;
        let x = Var::leaf(text.clone());
        let logits = self.head.forward(&x)?;
        Ok(finish(logits, None)?)
    }

    fn params(&self) -> Vec<(String, Var)> {
        let mut out = Vec::new();
        self.head.params("head", &mut out);
        out
    }

    fn arch(&self) -> ArchitectureId {
        ArchitectureId::Text
    }
}

/// Image and sentence-embedding features fused before the final layer.
struct FusionClassifier {
    enc: Encoder,
    img_w: Var,
    img_b: Var,
    text: TextBranch,
    head_w: Var,
    head_b: Var,
}

impl Net for FusionClassifier {
    fn forward(&self, inputs: &StudyInputs) -> Result<Forward, ModelError> {
        let image = require(&inputs.image, inputs, "image", self.arch())?;
        let text = require(&inputs.text, inputs, "sentence embedding", self.arch())?;
        let pooled = ops::global_avg_pool(&self.enc.forward(&Var::leaf(image.clone()))?)?;
        let f_img = ops::relu(&ops::affine(&pooled, &self.img_w, &self.img_b)?);
        let f_txt = self.text.forward(&Var::leaf(text.clone()))?;
        let fused = ops::concat(&[&f_img, &f_txt])?;
        let logits = ops::affine(&fused, &self.head_w, &self.head_b)?;
        Ok(finish(logits, None)?)
    }

    fn params(&self) -> Vec<(String, Var)> {
        let mut out = Vec::new();
        self.enc.params("enc", &mut out);
        out.push(("img.w".into(), self.img_w.clone()));
        out.push(("img.b".into(), self.img_b.clone()));
        self.text.params("text", &mut out);
        out.push(("head.w".into(), self.head_w.clone()));
        out.push(("head.b".into(), self.head_b.clone()));
        out
    }

    fn arch(&self) -> ArchitectureId {
        ArchitectureId::TextImgFusion
    }
}

/// Shared encoder with two branches: the classification head and the
/// upsampling decoder that emits an attention map. Optionally fuses a
/// text feature into the classification head only; the decoder path never
/// feeds the class head, so with the heatmap loss disabled the decoder
/// receives no gradient.
struct GazeUnet {
    enc: Encoder,
    img_w: Var,
    img_b: Var,
    text: Option<TextBranch>,
    head_w: Var,
    head_b: Var,
    dec: Decoder,
}

impl Net for GazeUnet {
    fn forward(&self, inputs: &StudyInputs) -> Result<Forward, ModelError> {
        let image = require(&inputs.image, inputs, "image", self.arch())?;
        let bottleneck = self.enc.forward(&Var::leaf(image.clone()))?;
        let pooled = ops::global_avg_pool(&bottleneck)?;
        let f_img = ops::relu(&ops::affine(&pooled, &self.img_w, &self.img_b)?);
        let fused = match &self.text {
            Some(branch) => {
                let text = require(&inputs.text, inputs, "sentence embedding", self.arch())?;
                let f_txt = branch.forward(&Var::leaf(text.clone()))?;
                ops::concat(&[&f_img, &f_txt])?
            }
            None => f_img,
        };
        let logits = ops::affine(&fused, &self.head_w, &self.head_b)?;
        let attention = self.dec.forward(&bottleneck)?;
        Ok(finish(logits, Some(attention))?)
    }

    fn params(&self) -> Vec<(String, Var)> {
        let mut out = Vec::new();
        self.enc.params("enc", &mut out);
        out.push(("img.w".into(), self.img_w.clone()));
        out.push(("img.b".into(), self.img_b.clone()));
        if let Some(branch) = &self.text {
            branch.params("text", &mut out);
        }
        out.push(("head.w".into(), self.head_w.clone()));
        out.push(("head.b".into(), self.head_b.clone()));
        self.dec.params("dec", &mut out);
        out
    }

    fn arch(&self) -> ArchitectureId {
        ArchitectureId::GazeSupervisedUnet
    }
}

/// Image encoder fused with the LSTM summary of the temporal heatmaps.
struct TemporalImgFusion {
    enc: Encoder,
    img_w: Var,
    img_b: Var,
    fenc: FrameEncoder,
    lstm: BiLstm,
    head_w: Var,
    head_b: Var,
}

impl Net for TemporalImgFusion {
    fn forward(&self, inputs: &StudyInputs) -> Result<Forward, ModelError> {
        let image = require(&inputs.image, inputs, "image", self.arch())?;
        let frames = require(&inputs.frames, inputs, "temporal frames", self.arch())?;
        if frames.is_empty() {
            return Err(NumericError::empty("temporal sequence has no frames").into());
        }
        let pooled = ops::global_avg_pool(&self.enc.forward(&Var::leaf(image.clone()))?)?;
        let f_img = ops::relu(&ops::affine(&pooled, &self.img_w, &self.img_b)?);
        let encoded: Vec<Var> = frames
            .iter()
            .map(|f| self.fenc.forward(&Var::leaf(f.clone())))
            .collect::<Result<_, _>>()?;
        let f_seq = self.lstm.run(&encoded)?;
        let fused = ops::concat(&[&f_img, &f_seq])?;
        let logits = ops::affine(&fused, &self.head_w, &self.head_b)?;
        Ok(finish(logits, None)?)
    }

    fn params(&self) -> Vec<(String, Var)> {
        let mut out = Vec::new();
        self.enc.params("enc", &mut out);
        out.push(("img.w".into(), self.img_w.clone()));
        out.push(("img.b".into(), self.img_b.clone()));
        self.fenc.params("frame_enc", &mut out);
        out.extend(self.lstm.params("lstm"));
        out.push(("head.w".into(), self.head_w.clone()));
        out.push(("head.b".into(), self.head_b.clone()));
        out
    }

    fn arch(&self) -> ArchitectureId {
        ArchitectureId::TemporalImgFusion
    }
}

/// Builds a freshly initialized model from the configuration seed.
pub fn build_net(cfg: &ModelConfig) -> Result<Box<dyn Net>, ModelError> {
    cfg.validate()?;
    let mut rng = seeded_rng(derive_seed(cfg.seed, SALT_INIT));
    let c4 = cfg.channels[3];
    let net: Box<dyn Net> = match cfg.arch {
        ArchitectureId::Img | ArchitectureId::HmapStatic => Box::new(EncoderClassifier {
            arch: cfg.arch,
            enc: Encoder::init(&cfg.channels, &mut rng),
            head: ClassHead::init(c4, cfg.img_feature, &mut rng),
        }),
        ArchitectureId::HmapTemporal => {
            let fenc = FrameEncoder::init(&cfg.channels, cfg.lstm_hidden, &mut rng);
            let lstm = BiLstm::init(cfg.lstm_hidden, cfg.lstm_hidden, &mut rng);
            let (head_w, head_b) = dense(3, 2 * cfg.lstm_hidden, &mut rng);
            Box::new(TemporalClassifier {
                fenc,
                lstm,
                head_w,
                head_b,
            })
        }
        ArchitectureId::Text => Box::new(TextClassifier {
            head: ClassHead::init(cfg.text_dim, cfg.text_feature, &mut rng),
        }),
        ArchitectureId::TextImgFusion => {
            let enc = Encoder::init(&cfg.channels, &mut rng);
            let (img_w, img_b) = dense(cfg.img_feature, c4, &mut rng);
            let text = TextBranch::init(cfg.text_dim, cfg.text_feature, &mut rng);
            let (head_w, head_b) = dense(3, cfg.img_feature + cfg.text_feature, &mut rng);
            Box::new(FusionClassifier {
                enc,
                img_w,
                img_b,
                text,
                head_w,
                head_b,
            })
        }
        ArchitectureId::GazeSupervisedUnet => {
            let enc = Encoder::init(&cfg.channels, &mut rng);
            let (img_w, img_b) = dense(cfg.img_feature, c4, &mut rng);
            let text = if cfg.unet_text {
                Some(TextBranch::init(cfg.text_dim, cfg.text_feature, &mut rng))
            } else {
                None
            };
            let head_in = cfg.img_feature + if cfg.unet_text { cfg.text_feature } else { 0 };
            let (head_w, head_b) = dense(3, head_in, &mut rng);
            let dec = Decoder::init(&cfg.channels, &mut rng);
            Box::new(GazeUnet {
                enc,
                img_w,
                img_b,
                text,
                head_w,
                head_b,
                dec,
            })
        }
        ArchitectureId::TemporalImgFusion => {
            let enc = Encoder::init(&cfg.channels, &mut rng);
            let (img_w, img_b) = dense(cfg.img_feature, c4, &mut rng);
            let fenc = FrameEncoder::init(&cfg.channels, cfg.lstm_hidden, &mut rng);
            let lstm = BiLstm::init(cfg.lstm_hidden, cfg.lstm_hidden, &mut rng);
            let (head_w, head_b) = dense(3, cfg.img_feature + 2 * cfg.lstm_hidden, &mut rng);
            Box::new(TemporalImgFusion {
                enc,
                img_w,
                img_b,
                fenc,
                lstm,
                head_w,
                head_b,
            })
        }
    };
    Ok(net)
}

/// Forward pass returning plain arrays: class probabilities and the
/// attention map when the architecture has one.
pub fn predict(
    net: &dyn Net,
    inputs: &StudyInputs,
) -> Result<(Vec<f64>, Option<NdArray>), ModelError> {
    let fwd = net.forward(inputs)?;
    let probs = fwd.probs.value().data().to_vec();
    let attention = fwd.attention.map(|a| a.value());
    Ok((probs, attention))
}
