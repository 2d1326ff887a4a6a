//! Published vulnerability and detectability figures, used to check that
//! reports render in the same layout and precision.

use morphlab_core::model::{MetricEntry, MetricsReport, Provenance, ReportKind};

pub const FR_MODELS: [&str; 4] = ["ElasticFace", "CurricularFace", "MixFaceNet", "PocketNet"];

/// Morphing technique, then (MMPMR100, MMPMR1000) per FR model.
pub const VULNERABILITY: [(&str, [(f64, f64); 4]); 6] = [
    ("OpenCV", [(0.997, 0.980), (0.996, 0.986), (0.996, 0.963), (0.996, 0.970)]),
    ("FaceMorpher", [(0.962, 0.913), (0.970, 0.935), (0.972, 0.931), (0.979, 0.941)]),
    ("WebMorph", [(0.990, 0.986), (0.988, 0.988), (0.988, 0.984), (0.988, 0.988)]),
    ("MIPGAN-I", [(0.980, 0.845), (0.962, 0.890), (0.981, 0.887), (0.991, 0.900)]),
    ("MIPGAN-II", [(0.953, 0.778), (0.953, 0.832), (0.973, 0.836), (0.977, 0.857)]),
    ("MorDIFF", [(0.990, 0.948), (0.995, 0.968), (0.992, 0.958), (0.996, 0.949)]),
];

/// MAD/training data, test data, EER %, APCER % at BPCER 1, 10 and 20 %.
pub const DETECTABILITY: [(&str, &str, f64, [f64; 3]); 36] = [
    ("MixFaceNet-MAD/SMDD", "FaceMorph", 4.60, [5.50, 3.60, 2.90]),
    ("MixFaceNet-MAD/SMDD", "MIPGAN_I", 16.70, [75.80, 22.20, 14.50]),
    ("MixFaceNet-MAD/SMDD", "MIPGAN_II", 20.62, [81.58, 32.03, 20.62]),
    ("MixFaceNet-MAD/SMDD", "OpenCV", 8.33, [36.38, 6.50, 3.76]),
    ("MixFaceNet-MAD/SMDD", "WebMorph", 18.20, [74.00, 24.00, 17.60]),
    ("MixFaceNet-MAD/SMDD", "MorphDiffusion", 8.50, [33.40, 7.40, 4.10]),
    ("MixFaceNet-MAD/LMAD-DRD", "FaceMorph", 5.60, [11.20, 3.30, 1.20]),
    ("MixFaceNet-MAD/LMAD-DRD", "MIPGAN_I", 14.40, [64.90, 19.80, 7.70]),
    ("MixFaceNet-MAD/LMAD-DRD", "MIPGAN_II", 11.51, [48.65, 13.51, 4.30]),
    ("MixFaceNet-MAD/LMAD-DRD", "OpenCV", 16.37, [72.46, 25.61, 12.09]),
    ("MixFaceNet-MAD/LMAD-DRD", "WebMorph", 21.60, [82.80, 46.60, 23.80]),
    ("MixFaceNet-MAD/LMAD-DRD", "MorphDiffusion", 21.40, [81.60, 43.90, 22.30]),
    ("MixFaceNet-MAD/MorGAN-LMA", "FaceMorph", 8.00, [13.90, 7.30, 0.00]),
    ("MixFaceNet-MAD/MorGAN-LMA", "MIPGAN_I", 14.60, [93.00, 30.40, 0.00]),
    ("MixFaceNet-MAD/MorGAN-LMA", "MIPGAN_II", 18.92, [93.19, 34.33, 0.00]),
    ("MixFaceNet-MAD/MorGAN-LMA", "OpenCV", 9.86, [78.76, 13.41, 0.00]),
    ("MixFaceNet-MAD/MorGAN-LMA", "WebMorph", 15.80, [92.40, 34.00, 0.00]),
    ("MixFaceNet-MAD/MorGAN-LMA", "MorphDiffusion", 13.50, [89.30, 27.20, 0.00]),
    ("Inception-MAD/SMDD", "FaceMorph", 0.00, [1.70, 0.00, 0.00]),
    ("Inception-MAD/SMDD", "MIPGAN_I", 10.90, [50.90, 13.70, 5.70]),
    ("Inception-MAD/SMDD", "MIPGAN_II", 16.22, [82.48, 25.83, 11.41]),
    ("Inception-MAD/SMDD", "OpenCV", 7.52, [28.66, 5.49, 3.05]),
    ("Inception-MAD/SMDD", "WebMorph", 18.00, [85.20, 27.40, 13.40]),
    ("Inception-MAD/SMDD", "MorphDiffusion", 5.30, [17.20, 3.50, 2.50]),
    ("Inception-MAD/LMAD-DRD", "FaceMorph", 61.00, [99.90, 99.60, 97.40]),
    ("Inception-MAD/LMAD-DRD", "MIPGAN_I", 41.30, [99.60, 89.50, 70.40]),
    ("Inception-MAD/LMAD-DRD", "MIPGAN_II", 39.74, [99.60, 88.19, 63.37]),
    ("Inception-MAD/LMAD-DRD", "OpenCV", 8.84, [40.96, 8.23, 2.13]),
    ("Inception-MAD/LMAD-DRD", "WebMorph", 20.20, [85.60, 41.00, 17.00]),
    ("Inception-MAD/LMAD-DRD", "MorphDiffusion", 95.40, [100.00, 100.00, 100.00]),
    ("Inception-MAD/MorGAN-LMA", "FaceMorph", 0.80, [0.70, 0.00, 0.00]),
    ("Inception-MAD/MorGAN-LMA", "MIPGAN_I", 46.10, [98.70, 89.20, 78.00]),
    ("Inception-MAD/MorGAN-LMA", "MIPGAN_II", 35.84, [96.80, 74.28, 56.26]),
    ("Inception-MAD/MorGAN-LMA", "OpenCV", 9.34, [45.43, 9.25, 2.95]),
    ("Inception-MAD/MorGAN-LMA", "WebMorph", 19.00, [70.00, 31.80, 18.40]),
    ("Inception-MAD/MorGAN-LMA", "MorphDiffusion", 26.50, [87.00, 53.10, 32.50]),
];

fn entry(model: &str, morph_type: &str, metric: &str, op: &str, value: f64) -> MetricEntry {
    MetricEntry {
        model: model.into(),
        morph_type: morph_type.into(),
        metric: metric.into(),
        operating_point: op.into(),
        value,
    }
}

pub fn vulnerability_report() -> MetricsReport {
    let mut entries = Vec::new();
    for (i, model) in FR_MODELS.iter().enumerate() {
        for (morph_type, cells) in &VULNERABILITY {
            let (m100, m1000) = cells[i];
            entries.push(entry(model, morph_type, "MMPMR", "MMPMR100", m100));
            entries.push(entry(model, morph_type, "MMPMR", "MMPMR1000", m1000));
        }
    }
    MetricsReport::new(ReportKind::Vulnerability, entries, vec![], Provenance::default()).unwrap()
}

pub fn detectability_report() -> MetricsReport {
    let mut entries = Vec::new();
    for (model, test, eer, apcer) in &DETECTABILITY {
        entries.push(entry(model, test, "EER", "EER", eer / 100.0));
        for (target, value) in ["BPCER1.00", "BPCER10.00", "BPCER20.00"].iter().zip(apcer) {
            entries.push(entry(model, test, "APCER", target, value / 100.0));
        }
    }
    MetricsReport::new(ReportKind::Detectability, entries, vec![], Provenance::default()).unwrap()
}
