//! Reference tables shipped with the crate.
//!
//! The four Table 2 blocks hold the published top-5 models by PePR-E plus the
//! best model by test performance for each experiment: parameters (M), GPU
//! memory (GB), energy for 10 epochs (Wh), time (s), test performance and the
//! reported PePR-E score. Architecture classes are taken from the model table.
//!
//! The model table lists the 131 architectures with their parameter counts
//! (M), architecture class and efficiency flag.

use std::fmt;
use std::str::FromStr;

use crate::error::{PeprError, Result};
use crate::io::fit::REPORTED_SCORE_COLUMN;
use crate::io::runs::{write_runs, RunFormat};
use crate::resource::{ArchClass, ResourceKind, RunRecord, RunTags};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Table2Row {
    pub model: &'static str,
    pub arch_class: ArchClass,
    pub efficient: bool,
    pub params_millions: f64,
    pub memory_gb: f64,
    pub energy_wh: f64,
    pub time_s: f64,
    pub performance: f64,
    pub pepr_e: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Table2Block {
    DermaNpt,
    Derma,
    Lidc,
    Pneumonia,
}

impl Table2Block {
    pub const ALL: [Table2Block; 4] = [
        Table2Block::DermaNpt,
        Table2Block::Derma,
        Table2Block::Lidc,
        Table2Block::Pneumonia,
    ];

    pub fn dataset_id(self) -> &'static str {
        match self {
            Table2Block::DermaNpt => "Derma_NPT",
            Table2Block::Derma => "Derma",
            Table2Block::Lidc => "LIDC",
            Table2Block::Pneumonia => "Pneumonia",
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Table2Block::DermaNpt => "table2_derma_npt",
            Table2Block::Derma => "table2_derma",
            Table2Block::Lidc => "table2_lidc",
            Table2Block::Pneumonia => "table2_pneumonia",
        }
    }
}

#[allow(clippy::too_many_arguments)]
const fn row(
    model: &'static str,
    arch_class: ArchClass,
    efficient: bool,
    params_millions: f64,
    memory_gb: f64,
    energy_wh: f64,
    time_s: f64,
    performance: f64,
    pepr_e: f64,
) -> Table2Row {
    Table2Row {
        model,
        arch_class,
        efficient,
        params_millions,
        memory_gb,
        energy_wh,
        time_s,
        performance,
        pepr_e,
    }
}

use ArchClass::{Cnn, Other};

const DERMA_NPT: [Table2Row; 6] = [
    row(
        "ESE-VoVNet",
        Cnn,
        true,
        6.5,
        3.8,
        20.4,
        12.9,
        0.7651,
        0.7070,
    ),
    row(
        "ResNet-18",
        Cnn,
        false,
        11.7,
        1.7,
        17.0,
        10.6,
        0.7480,
        0.7014,
    ),
    row(
        "ResNet-34",
        Cnn,
        false,
        21.8,
        2.3,
        23.5,
        14.9,
        0.7617,
        0.6973,
    ),
    row(
        "CrossVIT", Other, true, 8.6, 2.3, 23.2, 14.5, 0.7550, 0.6921,
    ),
    row("ConvNext", Cnn, false, 3.7, 1.6, 18.5, 11.9, 0.7273, 0.6781),
    row(
        "HaloNet-50",
        Other,
        false,
        22.7,
        7.3,
        47.7,
        29.9,
        0.7712,
        0.6498,
    ),
];

const DERMA: [Table2Row; 6] = [
    row("Ghostnet", Cnn, true, 5.2, 2.0, 17.4, 11.4, 0.8579, 0.8026),
    row(
        "ESE-VoVNet",
        Cnn,
        true,
        6.5,
        3.8,
        20.4,
        12.9,
        0.8634,
        0.7992,
    ),
    row("FBNet", Cnn, true, 5.6, 3.1, 18.5, 11.9, 0.8528, 0.7950),
    row(
        "MobileNetV2",
        Cnn,
        true,
        2.0,
        2.2,
        10.7,
        7.3,
        0.8251,
        0.7916,
    ),
    row(
        "MNASNet100",
        Other,
        true,
        4.4,
        2.3,
        15.2,
        10.0,
        0.8362,
        0.7889,
    ),
    row(
        "EdgeNext", Other, true, 18.5, 4.8, 50.6, 32.6, 0.8659, 0.7221,
    ),
];

const LIDC: [Table2Row; 6] = [
    row(
        "MNASNet100",
        Other,
        true,
        4.4,
        2.4,
        18.6,
        11.7,
        0.6732,
        0.6376,
    ),
    row(
        "ResNet-18",
        Cnn,
        false,
        11.7,
        1.7,
        20.4,
        12.5,
        0.6689,
        0.6303,
    ),
    row(
        "ResNet-14",
        Cnn,
        false,
        10.1,
        2.5,
        22.3,
        13.7,
        0.6709,
        0.6289,
    ),
    row(
        "ResNet-34",
        Cnn,
        false,
        21.8,
        2.3,
        21.7,
        20.2,
        0.6868,
        0.6273,
    ),
    row(
        "ResNet-26",
        Cnn,
        false,
        16.0,
        3.4,
        31.0,
        19.5,
        0.6818,
        0.6240,
    ),
    row(
        "DPN-107", Cnn, false, 86.9, 16.3, 228.0, 138.9, 0.6955, 0.4133,
    ),
];

const PNEUMONIA: [Table2Row; 6] = [
    row("DLA-460", Cnn, false, 1.3, 2.5, 8.8, 5.8, 0.9539, 0.9053),
    row(
        "HardcoreNAS",
        Other,
        true,
        5.3,
        2.3,
        8.5,
        5.6,
        0.9523,
        0.9050,
    ),
    row("MobileNetV2", Cnn, true, 2.0, 2.2, 5.6, 4.0, 0.9178, 0.8874),
    row(
        "MobileVitV2",
        Other,
        true,
        1.4,
        3.1,
        8.6,
        5.6,
        0.9293,
        0.8828,
    ),
    row("SEMNASNet", Other, true, 2.9, 2.8, 8.4, 5.5, 0.9276, 0.8821),
    row(
        "PNASNet", Other, false, 86.1, 22.7, 105.9, 64.8, 0.9605, 0.5830,
    ),
];

/// Rows of one block in published order (top-5 by PePR-E, then the best
/// model by test performance).
pub fn table2_block(block: Table2Block) -> &'static [Table2Row] {
    match block {
        Table2Block::DermaNpt => &DERMA_NPT,
        Table2Block::Derma => &DERMA,
        Table2Block::Lidc => &LIDC,
        Table2Block::Pneumonia => &PNEUMONIA,
    }
}

/// A block as run records; the reported score is kept in the
/// [`REPORTED_SCORE_COLUMN`] extra column.
pub fn table2_records(block: Table2Block) -> Vec<RunRecord> {
    table2_block(block)
        .iter()
        .map(|r| {
            RunRecord::new(
                r.model,
                block.dataset_id(),
                r.performance,
                RunTags::new(r.arch_class, r.efficient, Some(r.params_millions)),
            )
            .and_then(|rec| rec.with_resource(ResourceKind::Memory, r.memory_gb))
            .and_then(|rec| rec.with_resource(ResourceKind::Energy, r.energy_wh))
            .and_then(|rec| rec.with_resource(ResourceKind::Time, r.time_s))
            .map(|rec| rec.with_extra(REPORTED_SCORE_COLUMN, format!("{:.4}", r.pepr_e)))
            .expect("bundled rows are valid")
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelInfo {
    pub name: &'static str,
    pub params_millions: f64,
    pub arch_class: ArchClass,
    pub efficient: bool,
}

const fn model(
    name: &'static str,
    params_millions: f64,
    arch_class: ArchClass,
    efficient: bool,
) -> ModelInfo {
    ModelInfo {
        name,
        params_millions,
        arch_class,
        efficient,
    }
}

const MODEL_TABLE: [ModelInfo; 131] = [
    model("dla46x_c", 1.1, ArchClass::Cnn, false),
    model("dla46_c", 1.3, ArchClass::Cnn, false),
    model("mobilevitv2_050", 1.4, ArchClass::Other, true),
    model("mobilenetv2_050", 2.0, ArchClass::Cnn, true),
    model("semnasnet_075", 2.9, ArchClass::Other, true),
    model("pvt_v2_b0", 3.7, ArchClass::Other, true),
    model("convnext_atto", 3.7, ArchClass::Cnn, false),
    model("mnasnet_100", 4.4, ArchClass::Other, true),
    model("spnasnet_100", 4.4, ArchClass::Other, true),
    model("ghostnet_100", 5.2, ArchClass::Cnn, true),
    model("hardcorenas_a", 5.3, ArchClass::Other, true),
    model("efficientnet_b0", 5.3, ArchClass::Cnn, true),
    model("fbnetc_100", 5.6, ArchClass::Cnn, true),
    model("mobilevit_s", 5.6, ArchClass::Other, true),
    model("tinynet_a", 6.2, ArchClass::Cnn, true),
    model("ese_vovnet19b_dw", 6.5, ArchClass::Cnn, true),
    model("densenet121", 8.0, ArchClass::Cnn, false),
    model("densenetblur121d", 8.0, ArchClass::Cnn, false),
    model("crossvit_9_240", 8.6, ArchClass::Other, true),
    model("fbnetv3_b", 8.6, ArchClass::Cnn, true),
    model("resnet14t", 10.1, ArchClass::Cnn, false),
    model("seresnext26ts", 10.4, ArchClass::Other, false),
    model("gcresnext26ts", 10.5, ArchClass::Other, false),
    model("eca_botnext26ts_256", 10.6, ArchClass::Other, false),
    model("bat_resnext26ts", 10.7, ArchClass::Other, false),
    model("lambda_resnet26rpt_256", 11.0, ArchClass::Other, false),
    model("resnet18d", 11.7, ArchClass::Cnn, false),
    model("halonet26t", 12.5, ArchClass::Other, false),
    model("botnet26t_256", 12.5, ArchClass::Other, false),
    model("dpn68", 12.6, ArchClass::Cnn, false),
    model("dpn68b", 12.6, ArchClass::Cnn, false),
    model("gc_efficientnetv2_rw_t", 13.7, ArchClass::Other, true),
    model("sehalonet33ts", 13.7, ArchClass::Other, false),
    model("sebotnet33ts_256", 13.7, ArchClass::Other, false),
    model("densenet169", 14.1, ArchClass::Cnn, false),
    model("maxvit_nano_rw_256", 15.5, ArchClass::Other, false),
    model("gcresnext50ts", 15.7, ArchClass::Other, false),
    model("dla34", 15.7, ArchClass::Cnn, false),
    model("ecaresnet26t", 16.0, ArchClass::Other, true),
    model("resnet26d", 16.0, ArchClass::Cnn, false),
    model("maxxvit_rmlp_nano_rw_256", 16.8, ArchClass::Other, false),
    model("seresnext26t_32x4d", 16.8, ArchClass::Other, false),
    model("seresnext26d_32x4d", 16.8, ArchClass::Other, false),
    model("dla60x", 17.4, ArchClass::Cnn, false),
    model("resnet32ts", 18.0, ArchClass::Cnn, false),
    model("edgenext_base", 18.5, ArchClass::Other, true),
    model("eca_resnet33ts", 19.7, ArchClass::Other, true),
    model("seresnet33ts", 19.8, ArchClass::Other, false),
    model("gcresnet33ts", 19.9, ArchClass::Other, false),
    model("densenet201", 20.0, ArchClass::Cnn, false),
    model("cspresnext50", 20.6, ArchClass::Cnn, false),
    model("regnetv_040", 20.6, ArchClass::Cnn, false),
    model("convmixer_768_32", 21.1, ArchClass::Cnn, false),
    model("cs3darknet_focus_l", 21.2, ArchClass::Cnn, false),
    model("hrnet_w18", 21.3, ArchClass::Cnn, false),
    model("cspresnet50", 21.6, ArchClass::Other, true),
    model("gluon_resnet34_v1b", 21.8, ArchClass::Cnn, false),
    model("resnet34d", 21.8, ArchClass::Cnn, false),
    model("cs3sedarknet_l", 21.9, ArchClass::Other, true),
    model("dla60", 22.0, ArchClass::Cnn, false),
    model("lamhalobotnet50ts_256", 22.6, ArchClass::Other, false),
    model("halo2botnet50ts_256", 22.6, ArchClass::Other, false),
    model("halonet50ts", 22.7, ArchClass::Other, false),
    model("adv_inception_v3", 23.8, ArchClass::Cnn, false),
    model("gluon_inception_v3", 23.8, ArchClass::Cnn, false),
    model("res2next50", 24.7, ArchClass::Cnn, false),
    model("resnext50d_32x4d", 25.0, ArchClass::Cnn, false),
    model("res2net50_14w_8s", 25.1, ArchClass::Cnn, false),
    model("resnetv2_50", 25.5, ArchClass::Cnn, false),
    model("resnetblur50", 25.6, ArchClass::Cnn, false),
    model("resnetaa50", 25.6, ArchClass::Cnn, false),
    model("ecaresnet50t", 25.6, ArchClass::Other, true),
    model("ecaresnet50d", 25.6, ArchClass::Other, true),
    model("gcresnet50t", 25.9, ArchClass::Other, false),
    model("dla102x", 26.3, ArchClass::Cnn, false),
    model("xception41p", 26.9, ArchClass::Cnn, false),
    model("xception41", 27.0, ArchClass::Cnn, false),
    model("gluon_seresnext50_32x4d", 27.6, ArchClass::Cnn, false),
    model("cspdarknet53", 27.6, ArchClass::Other, true),
    model("legacy_seresnet50", 28.1, ArchClass::Cnn, false),
    model("repvgg_a2", 28.2, ArchClass::Cnn, true),
    model("convnext_tiny_hnf", 28.6, ArchClass::Cnn, false),
    model("densenet161", 28.7, ArchClass::Cnn, false),
    model("ecaresnetlight", 30.2, ArchClass::Other, false),
    model("selecsls60", 30.7, ArchClass::Cnn, false),
    model("gernet_l", 31.1, ArchClass::Cnn, true),
    model("selecsls42b", 32.5, ArchClass::Cnn, false),
    model("selecsls60b", 32.8, ArchClass::Cnn, false),
    model("dla102", 33.3, ArchClass::Cnn, false),
    model("resnetrs50", 35.7, ArchClass::Cnn, false),
    model("resnet51q", 35.7, ArchClass::Cnn, false),
    model("darknetaa53", 36.0, ArchClass::Cnn, false),
    model("resnet61q", 36.8, ArchClass::Cnn, false),
    model("dpn92", 37.7, ArchClass::Cnn, false),
    model("xception65p", 39.8, ArchClass::Cnn, false),
    model("gluon_xception65", 39.9, ArchClass::Cnn, false),
    model("dla102x2", 41.3, ArchClass::Cnn, false),
    model("xception71", 42.3, ArchClass::Cnn, false),
    model("twins_pcpvt_base", 43.8, ArchClass::Other, false),
    model("gluon_resnext101_32x4d", 44.2, ArchClass::Cnn, false),
    model("ecaresnet101d", 44.6, ArchClass::Other, true),
    model("res2net101_26w_4s", 45.2, ArchClass::Cnn, false),
    model("cs3edgenet_x", 47.8, ArchClass::Other, true),
    model("gluon_seresnext101_32x4d", 49.0, ArchClass::Cnn, false),
    model("cs3se_edgenet_x", 50.7, ArchClass::Other, true),
    model("efficientnetv2_rw_m", 53.2, ArchClass::Cnn, true),
    model("dla169", 53.4, ArchClass::Cnn, false),
    model("sequencer2d_l", 54.3, ArchClass::Other, false),
    model("poolformer_m36", 56.2, ArchClass::Other, false),
    model("gluon_resnet152_v1b", 60.2, ArchClass::Cnn, false),
    model("resnet152d", 60.2, ArchClass::Cnn, false),
    model("dpn98", 61.6, ArchClass::Cnn, false),
    model("resnetrs101", 63.6, ArchClass::Cnn, false),
    model("resnet200d", 64.7, ArchClass::Cnn, false),
    model("seresnet152d", 66.8, ArchClass::Other, false),
    model("wide_resnet50_2", 68.9, ArchClass::Cnn, false),
    model("dm_nfnet_f0", 71.5, ArchClass::Cnn, false),
    model("dpn131", 79.3, ArchClass::Cnn, false),
    model("pnasnet5large", 86.1, ArchClass::Other, false),
    model("resnetrs152", 86.6, ArchClass::Cnn, false),
    model("dpn107", 86.9, ArchClass::Cnn, false),
    model("swinv2_base_window8_256", 87.9, ArchClass::Other, false),
    model("nasnetalarge", 88.8, ArchClass::Other, false),
    model("resnetrs200", 93.2, ArchClass::Cnn, false),
    model("seresnext101d_32x8d", 93.6, ArchClass::Other, false),
    model("seresnextaa101d_32x8d", 93.6, ArchClass::Other, false),
    model("ecaresnet269d", 102.1, ArchClass::Other, true),
    model("legacy_senet154", 115.1, ArchClass::Cnn, false),
    model("resnetrs270", 129.9, ArchClass::Cnn, false),
    model("vgg11", 132.9, ArchClass::Cnn, false),
    model("vgg13", 133.0, ArchClass::Cnn, false),
];

/// The 131-model table.
pub fn model_table() -> &'static [ModelInfo] {
    &MODEL_TABLE
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BundledDataset {
    Table2(Table2Block),
    Table3Models,
}

impl BundledDataset {
    pub const ALL: [BundledDataset; 5] = [
        BundledDataset::Table2(Table2Block::DermaNpt),
        BundledDataset::Table2(Table2Block::Derma),
        BundledDataset::Table2(Table2Block::Lidc),
        BundledDataset::Table2(Table2Block::Pneumonia),
        BundledDataset::Table3Models,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BundledDataset::Table2(b) => b.name(),
            BundledDataset::Table3Models => "table3_models",
        }
    }
}

impl fmt::Display for BundledDataset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BundledDataset {
    type Err = PeprError;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().trim_end_matches(".csv").to_ascii_lowercase();
        BundledDataset::ALL
            .into_iter()
            .find(|d| d.name() == s)
            .ok_or_else(|| {
                PeprError::InvalidArgument(format!(
                    "unknown bundled dataset `{s}`; expected one of {}",
                    BundledDataset::ALL.map(|d| d.name()).join(", ")
                ))
            })
    }
}

/// CSV text of a bundled dataset. Table 2 blocks use the run-record schema
/// plus a reported-score column; the model table has
/// `model_id,params_millions,arch_class,efficient`.
pub fn bundled_csv(dataset: BundledDataset) -> String {
    match dataset {
        BundledDataset::Table2(block) => {
            write_runs(&table2_records(block), RunFormat::Csv).expect("in-memory csv write")
        }
        BundledDataset::Table3Models => {
            let mut out = String::from("model_id,params_millions,arch_class,efficient\n");
            for m in model_table() {
                out.push_str(&format!(
                    "{},{:.1},{},{}\n",
                    m.name, m.params_millions, m.arch_class, m.efficient
                ));
            }
            out
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::runs::read_runs;

    #[test]
    fn model_table_counts() {
        let models = model_table();
        assert_eq!(models.len(), 131);
        assert_eq!(
            models
                .iter()
                .filter(|m| m.arch_class == ArchClass::Cnn)
                .count(),
            80
        );
        assert_eq!(models.iter().filter(|m| m.efficient).count(), 31);
        assert_eq!(models[0].name, "dla46x_c");
        assert_eq!(models[130].name, "vgg13");
    }

    #[test]
    fn table2_blocks_have_six_rows() {
        for block in Table2Block::ALL {
            assert_eq!(table2_block(block).len(), 6);
            let recs = table2_records(block);
            assert!(recs.iter().all(|r| r.dataset_id() == block.dataset_id()));
        }
        assert_eq!(table2_block(Table2Block::DermaNpt)[0].pepr_e, 0.7070);
    }

    #[test]
    fn bundled_csv_parses_back() {
        let text = bundled_csv(BundledDataset::Table2(Table2Block::Derma));
        assert!(text
            .starts_with("model_id,dataset_id,performance,params_millions,arch_class,efficient"));
        let recs = read_runs(&text, RunFormat::Csv).unwrap();
        assert_eq!(recs, table2_records(Table2Block::Derma));
        let models = bundled_csv(BundledDataset::Table3Models);
        assert_eq!(models.lines().count(), 132);
    }

    #[test]
    fn dataset_names() {
        assert_eq!(
            "table2_lidc.csv".parse::<BundledDataset>().unwrap(),
            BundledDataset::Table2(Table2Block::Lidc)
        );
        assert!("table9".parse::<BundledDataset>().is_err());
    }
}
