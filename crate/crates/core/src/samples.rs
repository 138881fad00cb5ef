//! Small reference matrices and benchmark layer shapes.

use crate::matrix::{LayerShape, WeightMatrix};
use crate::plan::{ChannelOrder, ClusterPlan, Segment};

/// 2-bit, 4x4: rows alternate all-`00` and all-`11`. 24 flips in natural
/// order, 8 once the two `00` rows and the two `11` rows are adjacent.
pub fn w_a() -> WeightMatrix {
    WeightMatrix::from_rows(
        "w_a",
        2,
        &[[0u16, 0, 0, 0], [3, 3, 3, 3], [0, 0, 0, 0], [3, 3, 3, 3]],
    )
    .expect("valid")
}

/// 2-bit, 4x4 with rows `[10,10,10,01]` and `[11,11,11,11]` alternating.
/// 12 flips in natural order, 4 after reordering.
pub fn w_b() -> WeightMatrix {
    WeightMatrix::from_rows(
        "w_b",
        2,
        &[[2u16, 2, 2, 1], [3, 3, 3, 3], [2, 2, 2, 1], [3, 3, 3, 3]],
    )
    .expect("valid")
}

/// 2-bit, 4x8 clustering example: contiguous width-4 segments reach 22
/// flips at best, the interleaved clusters `{0,2,4,6}`, `{1,3,5,7}` reach 16.
pub fn w_c() -> WeightMatrix {
    WeightMatrix::from_rows(
        "w_c",
        2,
        &[
            [0u16, 3, 0, 3, 1, 2, 1, 2],
            [3, 3, 0, 0, 2, 2, 1, 1],
            [3, 0, 0, 3, 2, 1, 2, 2],
            [3, 3, 3, 3, 2, 2, 2, 2],
        ],
    )
    .expect("valid")
}

fn plan(width: usize, parts: &[(&[usize], &[usize])]) -> ClusterPlan {
    let segments = parts
        .iter()
        .map(|(cols, order)| {
            Segment::new(
                cols.to_vec(),
                ChannelOrder::new(order.to_vec()).expect("permutation"),
            )
            .expect("segment")
        })
        .collect();
    ClusterPlan::new(width, segments).expect("valid plan")
}

/// Contiguous width-4 segmentation of [`w_c`] with per-segment optimal orders
/// (12 + 10 flips).
pub fn w_c_contiguous_plan() -> ClusterPlan {
    plan(
        4,
        &[
            (&[0, 1, 2, 3], &[0, 1, 2, 3]),
            (&[4, 5, 6, 7], &[0, 1, 3, 2]),
        ],
    )
}

/// Interleaved clustering of [`w_c`] with per-cluster optimal orders
/// (8 + 8 flips).
pub fn w_c_clustered_plan() -> ClusterPlan {
    plan(
        4,
        &[
            (&[0, 2, 4, 6], &[0, 1, 2, 3]),
            (&[1, 3, 5, 7], &[1, 0, 3, 2]),
        ],
    )
}

const MOBILENET_V2_C: [usize; 33] = [
    16, 96, 24, 144, 24, 144, 32, 192, 32, 192, 32, 192, 64, 384, 64, 384, 64, 384, 64, 384, 96,
    576, 96, 576, 96, 576, 160, 960, 160, 960, 160, 960, 320,
];
const MOBILENET_V2_K: [usize; 33] = [
    96, 24, 144, 24, 144, 32, 192, 32, 192, 32, 192, 64, 384, 64, 384, 64, 384, 64, 384, 96, 576,
    96, 576, 96, 576, 160, 960, 160, 960, 160, 960, 320, 1280,
];
const RESNET26_C: [usize; 26] = [
    16, 16, 16, 16, 16, 16, 16, 16, 16, 32, 16, 32, 32, 32, 32, 32, 32, 32, 64, 32, 32, 32, 32, 32,
    32, 32,
];
const RESNET26_K: [usize; 26] = [
    16, 16, 16, 16, 16, 16, 16, 16, 32, 32, 16, 32, 32, 32, 32, 32, 32, 64, 64, 64, 64, 64, 64, 64,
    64, 64,
];

/// The 33 pointwise (1x1) convolutions of MobileNetV2.
pub fn mobilenet_v2_1x1() -> Vec<(String, LayerShape)> {
    MOBILENET_V2_C
        .iter()
        .zip(MOBILENET_V2_K)
        .enumerate()
        .map(|(i, (&c, k))| (format!("mobilenet_v2_{}", i + 1), LayerShape::new(c, k)))
        .collect()
}

/// The 26 3x3 convolutions of ResNet26.
pub fn resnet26_3x3() -> Vec<(String, LayerShape)> {
    RESNET26_C
        .iter()
        .zip(RESNET26_K)
        .enumerate()
        .map(|(i, (&c, k))| {
            (
                format!("resnet26_{}", i + 1),
                LayerShape::new(c, k).with_filter(3, 3),
            )
        })
        .collect()
}
