//! Line-delimited JSON detection logs: one frame per line, frames of a
//! sequence contiguous and in time order.
//!
//! ```json
//! {"sequence":"s00","frame":0,"timestamp":0.0,
//!  "ego":{"x":0.0,"y":0.0,"theta":0.0},
//!  "fov":{"shape":{"kind":"full_circle"},"max_range":80.0},
//!  "detections":[{"x":4.0,"y":1.0,"class":"pedestrian","sigma":0.5}],
//!  "labeled_points":[{"x":3.0,"y":8.0,"label":"sidewalk"}],
//!  "obstacles":[{"kind":"circle","center":[10.0,0.0],"radius":1.0}],
//!  "truth":[{"id":1,"x":4.2,"y":0.9,"class":"pedestrian"}]}
//! ```
//!
//! `fov`, `class`, `sigma`, and the truth flags `visible`/`detected` are
//! optional; everything except `sequence`, `frame`, `timestamp` and `ego` may
//! be omitted when empty. Positions are global-frame meters. A truth entry
//! without `visible` counts as in view; without `detected` it counts as
//! detected when some detection of the frame lies within the track gate.

use std::io::Write;
use std::path::Path;

use nalgebra::{Matrix2, Vector2};
use serde::{Deserialize, Serialize};

use crate::birth::{BirthContext, LabeledPoint, SourceConfidence};
use crate::error::{Error, Result};
use crate::geometry::{EgoPose, FieldOfView, Obstacle};
use crate::gm::{Detection, Position};
use crate::metrics::TruthRecord;
use crate::sim::{Scan, Scenario};
use crate::tracker::FrameInput;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LogDetection {
    pub x: f64,
    pub y: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class: Option<String>,
    /// Isotropic position standard deviation (m).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LogPoint {
    pub x: f64,
    pub y: f64,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LogTarget {
    pub id: u32,
    pub x: f64,
    pub y: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub visible: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detected: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LogFrame {
    pub sequence: String,
    pub frame: usize,
    pub timestamp: f64,
    pub ego: EgoPose,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fov: Option<FieldOfView>,
    #[serde(default)]
    pub detections: Vec<LogDetection>,
    #[serde(default)]
    pub labeled_points: Vec<LogPoint>,
    #[serde(default)]
    pub obstacles: Vec<Obstacle>,
    #[serde(default)]
    pub truth: Vec<LogTarget>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectionLogSequence {
    pub id: String,
    pub frames: Vec<LogFrame>,
}

impl DetectionLogSequence {
    /// Distinct ground-truth targets in the sequence.
    pub fn n_targets(&self) -> usize {
        let mut ids: Vec<u32> = self.frames.iter().flat_map(|f| f.truth.iter().map(|t| t.id)).collect();
        ids.sort_unstable();
        ids.dedup();
        ids.len()
    }

    pub fn duration_steps(&self) -> usize {
        self.frames.len()
    }

    /// Mean frame period, or `fallback` with fewer than two frames.
    pub fn dt(&self, fallback: f64) -> f64 {
        match (self.frames.first(), self.frames.last()) {
            (Some(a), Some(b)) if self.frames.len() > 1 && b.timestamp > a.timestamp => {
                (b.timestamp - a.timestamp) / (self.frames.len() - 1) as f64
            }
            _ => fallback,
        }
    }
}

/// Filter-side settings for turning log frames into filter inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct LogInputConfig {
    pub fov: FieldOfView,
    pub detection_sigma: f64,
    pub classes: Vec<String>,
    pub birth_labels: Vec<String>,
    pub expected_births: f64,
    pub confidences: SourceConfidence,
    /// Gate used to infer `detected` flags that the log leaves out (m).
    pub gate: f64,
}

impl LogInputConfig {
    fn keeps(&self, class: &Option<String>) -> bool {
        match class {
            Some(c) if !self.classes.is_empty() => self.classes.contains(c),
            _ => true,
        }
    }
}

fn detection_of(d: &LogDetection, cfg: &LogInputConfig) -> Detection {
    let s = d.sigma.unwrap_or(cfg.detection_sigma);
    Detection::new(Vector2::new(d.x, d.y), Matrix2::identity() * s * s)
}

/// Filter inputs for every frame of `seq`.
pub fn sequence_frames(seq: &DetectionLogSequence, cfg: &LogInputConfig) -> Vec<FrameInput> {
    let g2 = cfg.gate * cfg.gate;
    let kept = |f: &LogFrame| -> Vec<Position> {
        f.detections
            .iter()
            .filter(|d| cfg.keeps(&d.class))
            .map(|d| Vector2::new(d.x, d.y))
            .collect()
    };
    seq.frames
        .iter()
        .enumerate()
        .map(|(k, f)| {
            let positions = kept(f);
            let context = BirthContext {
                ego: f.ego,
                fov: f.fov.unwrap_or(cfg.fov),
                workspace: None,
                obstacles: f.obstacles.clone(),
                labeled_points: f
                    .labeled_points
                    .iter()
                    .map(|p| LabeledPoint {
                        position: Vector2::new(p.x, p.y),
                        label: p.label.clone(),
                    })
                    .collect(),
                birth_labels: cfg.birth_labels.clone(),
                prev_measurements: k.checked_sub(1).map(|j| kept(&seq.frames[j])).unwrap_or_default(),
                expected_births: cfg.expected_births,
                confidences: cfg.confidences,
            };
            let truth = f
                .truth
                .iter()
                .filter(|t| cfg.keeps(&t.class))
                .map(|t| {
                    let p = Vector2::new(t.x, t.y);
                    let detected = t
                        .detected
                        .unwrap_or_else(|| positions.iter().any(|z| (z - p).norm_squared() <= g2));
                    TruthRecord {
                        id: t.id,
                        position: p,
                        visible: t.visible.unwrap_or(true),
                        detected,
                    }
                })
                .collect();
            FrameInput {
                context,
                detections: f
                    .detections
                    .iter()
                    .filter(|d| cfg.keeps(&d.class))
                    .map(|d| detection_of(d, cfg))
                    .collect(),
                truth,
            }
        })
        .collect()
}

/// Parses JSONL text into sequences, checking contiguity and timestamp order.
pub fn parse_jsonl(text: &str, path: &Path) -> Result<Vec<DetectionLogSequence>> {
    let mut out: Vec<DetectionLogSequence> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let frame: LogFrame = serde_json::from_str(line).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: Some(lineno),
            message: e.to_string(),
        })?;
        let schema = |message: String| Error::Parse {
            path: path.to_path_buf(),
            line: Some(lineno),
            message,
        };
        match out.last_mut() {
            Some(seq) if seq.id == frame.sequence => {
                let prev = seq.frames.last().map(|f| f.timestamp).unwrap_or(f64::NEG_INFINITY);
                if !(frame.timestamp > prev) {
                    return Err(schema(format!(
                        "timestamps must increase within sequence `{}` ({} after {})",
                        seq.id, frame.timestamp, prev
                    )));
                }
                seq.frames.push(frame);
            }
            _ => {
                if out.iter().any(|s| s.id == frame.sequence) {
                    return Err(schema(format!(
                        "frames of sequence `{}` are not contiguous",
                        frame.sequence
                    )));
                }
                out.push(DetectionLogSequence {
                    id: frame.sequence.clone(),
                    frames: vec![frame],
                });
            }
        }
    }
    Ok(out)
}

/// Loads a JSONL file, or every `*.jsonl` file of a directory in name order.
pub fn load_logs(path: &Path) -> Result<Vec<DetectionLogSequence>> {
    if path.is_dir() {
        let mut files: Vec<_> = std::fs::read_dir(path)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "jsonl"))
            .collect();
        files.sort();
        let mut out: Vec<DetectionLogSequence> = Vec::new();
        for f in files {
            for seq in load_logs(&f)? {
                if out.iter().any(|s| s.id == seq.id) {
                    return Err(Error::Schema(format!(
                        "sequence `{}` appears in more than one file",
                        seq.id
                    )));
                }
                out.push(seq);
            }
        }
        return Ok(out);
    }
    let text = std::fs::read_to_string(path)?;
    parse_jsonl(&text, path)
}

pub fn write_jsonl<W: Write>(sequences: &[DetectionLogSequence], mut w: W) -> Result<()> {
    for seq in sequences {
        for f in &seq.frames {
            serde_json::to_writer(&mut w, f).map_err(|e| Error::Schema(e.to_string()))?;
            w.write_all(b"\n")?;
        }
    }
    Ok(())
}

/// Records simulated scans as a detection log (detections in the global
/// frame, truth flags kept).
pub fn scans_to_sequence(id: &str, scans: &[Scan], scenario: &Scenario) -> DetectionLogSequence {
    let sigma = scenario.noise.sigma_range;
    let frames = scans
        .iter()
        .enumerate()
        .map(|(k, scan)| LogFrame {
            sequence: id.to_string(),
            frame: k,
            timestamp: scan.time,
            ego: scan.ego,
            fov: Some(scenario.fov),
            detections: scan
                .detection_positions()
                .into_iter()
                .map(|p| LogDetection {
                    x: p.x,
                    y: p.y,
                    class: Some("pedestrian".into()),
                    sigma: Some(sigma),
                })
                .collect(),
            labeled_points: scan
                .labeled_points
                .iter()
                .map(|p| LogPoint {
                    x: p.position.x,
                    y: p.position.y,
                    label: p.label.clone(),
                })
                .collect(),
            obstacles: scan.obstacle_observations.clone(),
            truth: scan
                .truth
                .iter()
                .filter(|t| t.state.is_present())
                .map(|t| LogTarget {
                    id: t.id,
                    x: t.state.x,
                    y: t.state.y,
                    class: Some("pedestrian".into()),
                    visible: Some(t.visible),
                    detected: Some(t.detected),
                })
                .collect(),
        })
        .collect();
    DetectionLogSequence {
        id: id.to_string(),
        frames,
    }
}
