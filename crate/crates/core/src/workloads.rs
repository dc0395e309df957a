//! Transformer encoder layers lowered to ordered GEMM task lists.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransformerConfig {
    pub model_name: String,
    pub layers: usize,
    pub hidden_dim: usize,
    pub heads: usize,
    pub ffn_dim: usize,
    pub seq_len: usize,
    /// Output classes of the classifier head.
    #[serde(default)]
    pub num_classes: usize,
    /// Emit the classifier head as one extra FC GEMM on the pooled token.
    #[serde(default)]
    pub include_classifier: bool,
}

impl TransformerConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn preset(name: &str) -> Result<Self> {
        Self::from_toml_str(crate::presets::model(name)?)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("layers", self.layers),
            ("hidden_dim", self.hidden_dim),
            ("heads", self.heads),
            ("ffn_dim", self.ffn_dim),
            ("seq_len", self.seq_len),
        ] {
            if v == 0 {
                return Err(invalid(name, "must be >= 1"));
            }
        }
        if !self.hidden_dim.is_multiple_of(self.heads) {
            return Err(invalid(
                "heads",
                format!("hidden_dim {} is not divisible by {} heads", self.hidden_dim, self.heads),
            ));
        }
        if self.include_classifier && self.num_classes == 0 {
            return Err(invalid("num_classes", "classifier enabled with zero classes"));
        }
        Ok(())
    }

    pub fn head_dim(&self) -> usize {
        self.hidden_dim / self.heads
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperandKind {
    StaticWeight,
    DynamicActivation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Group {
    #[serde(rename = "MHA")]
    Mha,
    #[serde(rename = "FC")]
    Fc,
}

impl Group {
    pub fn label(self) -> &'static str {
        match self {
            Group::Mha => "MHA",
            Group::Fc => "FC",
        }
    }
}

/// `[m × k] · [k × n]`, left operand streamed row-wise, right operand shared.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GemmTask {
    pub name: String,
    pub layer: usize,
    pub m: usize,
    pub k: usize,
    pub n: usize,
    pub operand_a_kind: OperandKind,
    pub operand_b_kind: OperandKind,
    pub group: Group,
    pub repeat: u64,
}

impl GemmTask {
    pub fn fc(name: impl Into<String>, layer: usize, m: usize, k: usize, n: usize) -> Self {
        Self {
            name: name.into(),
            layer,
            m,
            k,
            n,
            operand_a_kind: OperandKind::DynamicActivation,
            operand_b_kind: OperandKind::StaticWeight,
            group: Group::Fc,
            repeat: 1,
        }
    }

    pub fn mha(name: impl Into<String>, layer: usize, m: usize, k: usize, n: usize) -> Self {
        Self {
            name: name.into(),
            layer,
            m,
            k,
            n,
            operand_a_kind: OperandKind::DynamicActivation,
            operand_b_kind: OperandKind::DynamicActivation,
            group: Group::Mha,
            repeat: 1,
        }
    }

    pub fn macs(&self) -> u64 {
        (self.m * self.k * self.n) as u64 * self.repeat
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DigitalOpKind {
    Softmax,
    LayerNorm,
    Gelu,
}

/// Element-wise or row-wise work done by the digital units.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DigitalOp {
    pub kind: DigitalOpKind,
    pub layer: usize,
    pub elements: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WorkloadGraph {
    pub model: String,
    pub gemms: Vec<GemmTask>,
    pub digital_ops: Vec<DigitalOp>,
}

impl WorkloadGraph {
    pub fn total_macs(&self) -> u64 {
        self.gemms.iter().map(GemmTask::macs).sum()
    }

    pub fn group(&self, group: Group) -> impl Iterator<Item = &GemmTask> {
        self.gemms.iter().filter(move |g| g.group == group)
    }
}

/// Per layer: Q, K, V projections; per head `QKᵀ`, softmax and `attn·V`;
/// output projection; two LayerNorms; FFN up, GELU, FFN down.
pub fn extract_gemms(cfg: &TransformerConfig) -> Result<WorkloadGraph> {
    cfg.validate()?;
    let (s, d, dk, f) = (cfg.seq_len, cfg.hidden_dim, cfg.head_dim(), cfg.ffn_dim);
    let mut gemms = Vec::new();
    let mut ops = Vec::new();
    let op = |kind, layer, elements: usize| DigitalOp { kind, layer, elements: elements as u64 };
    for l in 0..cfg.layers {
        ops.push(op(DigitalOpKind::LayerNorm, l, s * d));
        for proj in ["q_proj", "k_proj", "v_proj"] {
            gemms.push(GemmTask::fc(proj, l, s, d, d));
        }
        for h in 0..cfg.heads {
            gemms.push(GemmTask::mha(format!("qk_head{h}"), l, s, dk, s));
            ops.push(op(DigitalOpKind::Softmax, l, s * s));
            gemms.push(GemmTask::mha(format!("av_head{h}"), l, s, s, dk));
        }
        gemms.push(GemmTask::fc("out_proj", l, s, d, d));
        ops.push(op(DigitalOpKind::LayerNorm, l, s * d));
        gemms.push(GemmTask::fc("ffn1", l, s, d, f));
        ops.push(op(DigitalOpKind::Gelu, l, s * f));
        gemms.push(GemmTask::fc("ffn2", l, s, f, d));
    }
    if cfg.include_classifier {
        gemms.push(GemmTask::fc("classifier", cfg.layers, 1, d, cfg.num_classes));
    }
    Ok(WorkloadGraph { model: cfg.model_name.clone(), gemms, digital_ops: ops })
}
