use mavo_core::crf::BinaryMask;
use mavo_core::datasets::{synth_sequence, CameraPath, SynthConfig, SynthSequence};
use mavo_core::evaluate::{associate_poses, ate, DEFAULT_MAX_DIFF};
use mavo_core::odometry::{track_sequence, SequenceResult, TrackingParams};

fn track(seq: &SynthSequence, masks: Option<&[BinaryMask]>) -> SequenceResult {
    track_sequence(&seq.rgbd_frames(), masks, &seq.intrinsics, &TrackingParams::default()).unwrap()
}

fn ate_rmse(seq: &SynthSequence, res: &SequenceResult) -> f64 {
    let pairs = associate_poses(&seq.ground_truth, &res.trajectory, DEFAULT_MAX_DIFF).unwrap();
    ate(&pairs).unwrap().rmse
}

#[test]
fn static_camera_stays_put() {
    let seq = synth_sequence(&SynthConfig {
        num_frames: 10,
        camera_path: CameraPath::Static,
        object_count: 0,
        ..Default::default()
    })
    .unwrap();
    let res = track(&seq, None);
    assert!(res.fallback_frames.is_empty());
    assert!(ate_rmse(&seq, &res) < 1e-3);
}

#[test]
fn omitted_masks_match_empty_masks() {
    let seq = synth_sequence(&SynthConfig {
        num_frames: 6,
        ..Default::default()
    })
    .unwrap();
    let zeros: Vec<BinaryMask> = seq
        .masks
        .iter()
        .map(|m| BinaryMask::zeros(m.width(), m.height()))
        .collect();
    let a = track(&seq, None);
    let b = track(&seq, Some(&zeros));
    assert_eq!(a.trajectory, b.trajectory);
    assert_eq!(a.inliers, b.inliers);
}

#[test]
fn masking_a_moving_object_reduces_drift() {
    let seq = synth_sequence(&SynthConfig {
        num_frames: 30,
        seed: 3,
        ..Default::default()
    })
    .unwrap();
    let plain = ate_rmse(&seq, &track(&seq, None));
    let masked = ate_rmse(&seq, &track(&seq, Some(&seq.masks)));
    assert!(masked < 0.5 * plain, "masked {masked} vs unmasked {plain}");
}
