//! Reference clips: time-indexed target poses for hands and object.

use std::fmt::Write as _;
use std::path::Path;

use super::ImitationError;
use crate::physics::{angle_diff, wrap_angle, Pose2};

#[derive(Clone, Debug, PartialEq)]
pub struct HandPose {
    pub root: Pose2,
    pub joints: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClipFrame {
    pub hands: Vec<HandPose>,
    pub object: Pose2,
}

impl ClipFrame {
    fn lerp(&self, other: &ClipFrame, t: f64) -> ClipFrame {
        ClipFrame {
            hands: self
                .hands
                .iter()
                .zip(&other.hands)
                .map(|(a, b)| HandPose {
                    root: a.root.interpolate(&b.root, t),
                    joints: a.joints.iter().zip(&b.joints).map(|(x, y)| x + t * (y - x)).collect(),
                })
                .collect(),
            object: self.object.interpolate(&other.object, t),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReferenceClip {
    /// Frames per second.
    pub frame_rate: f64,
    frames: Vec<ClipFrame>,
}

impl ReferenceClip {
    pub fn new(frame_rate: f64, mut frames: Vec<ClipFrame>) -> Result<Self, ImitationError> {
        let bad = |m: String| ImitationError::InvalidClip(m);
        if !(frame_rate > 0.0 && frame_rate.is_finite()) {
            return Err(bad(format!("frame rate {frame_rate}")));
        }
        if frames.len() < 2 {
            return Err(bad(format!("{} frames, need at least 2", frames.len())));
        }
        let shape: Vec<usize> = frames[0].hands.iter().map(|h| h.joints.len()).collect();
        if shape.is_empty() {
            return Err(bad("no hands".into()));
        }
        for (i, f) in frames.iter_mut().enumerate() {
            if f.hands.iter().map(|h| h.joints.len()).ne(shape.iter().copied()) {
                return Err(bad(format!("frame {i} has a different hand layout")));
            }
            let finite = f.object.is_finite() && f.hands.iter().all(|h| h.root.is_finite() && h.joints.iter().all(|q| q.is_finite()));
            if !finite {
                return Err(bad(format!("frame {i} is not finite")));
            }
            f.object.angle = wrap_angle(f.object.angle);
            for h in &mut f.hands {
                h.root.angle = wrap_angle(h.root.angle);
            }
        }
        Ok(Self { frame_rate, frames })
    }

    pub fn frames(&self) -> &[ClipFrame] {
        &self.frames
    }

    pub fn hand_count(&self) -> usize {
        self.frames[0].hands.len()
    }

    /// Joint count of hand 0.
    pub fn joints(&self) -> usize {
        self.frames[0].hands[0].joints.len()
    }

    /// Seconds covered: one frame period per frame.
    pub fn duration(&self) -> f64 {
        self.frames.len() as f64 / self.frame_rate
    }

    /// Number of control steps T at `control_rate`.
    pub fn steps(&self, control_rate: f64) -> usize {
        (self.duration() * control_rate + 1e-9).floor() as usize
    }

    /// Linear interpolation at `time` seconds, clamped to the clip.
    pub fn frame_at(&self, time: f64) -> ClipFrame {
        let s = (time * self.frame_rate).clamp(0.0, (self.frames.len() - 1) as f64);
        let i = (s.floor() as usize).min(self.frames.len() - 2);
        let t = s - i as f64;
        if t == 0.0 {
            return self.frames[i].clone();
        }
        self.frames[i].lerp(&self.frames[i + 1], t)
    }

    /// Reference frame for control step `k`.
    pub fn frame_at_step(&self, k: usize, control_rate: f64) -> ClipFrame {
        self.frame_at(k as f64 / control_rate)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "rate {:.16e}", self.frame_rate);
        let _ = writeln!(s, "joints {}", self.joints());
        let _ = writeln!(s, "hands {}", self.hand_count());
        let num = |s: &mut String, x: f64| {
            let _ = write!(s, " {x:.16e}");
        };
        for f in &self.frames {
            s.push('f');
            for h in &f.hands {
                num(&mut s, h.root.pos.x);
                num(&mut s, h.root.pos.y);
                num(&mut s, h.root.angle);
                for q in &h.joints {
                    num(&mut s, *q);
                }
            }
            num(&mut s, f.object.pos.x);
            num(&mut s, f.object.pos.y);
            num(&mut s, f.object.angle);
            s.push('\n');
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self, ImitationError> {
        let (mut rate, mut joints, mut hands) = (None, None, 1usize);
        let mut frames = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| ImitationError::Parse { line: i + 1, msg };
            let mut tok = line.split_whitespace();
            let key = tok.next().unwrap_or("");
            let nums: Vec<f64> = tok
                .map(|t| t.parse::<f64>().map_err(|_| err(format!("bad number `{t}`"))))
                .collect::<Result<_, _>>()?;
            match key {
                "rate" => rate = Some(*nums.first().ok_or_else(|| err("rate needs a value".into()))?),
                "joints" => joints = Some(*nums.first().ok_or_else(|| err("joints needs a value".into()))? as usize),
                "hands" => hands = *nums.first().ok_or_else(|| err("hands needs a value".into()))? as usize,
                "f" => {
                    let j = joints.ok_or_else(|| err("frame before `joints` header".into()))?;
                    let want = hands * (3 + j) + 3;
                    if nums.len() != want {
                        return Err(err(format!("{} values, expected {want}", nums.len())));
                    }
                    let mut it = nums.chunks(3 + j);
                    let hp = (0..hands)
                        .map(|_| {
                            let c = it.next().unwrap();
                            HandPose {
                                root: Pose2::new(c[0], c[1], c[2]),
                                joints: c[3..].to_vec(),
                            }
                        })
                        .collect();
                    let o = &nums[hands * (3 + j)..];
                    frames.push(ClipFrame {
                        hands: hp,
                        object: Pose2::new(o[0], o[1], o[2]),
                    });
                }
                other => return Err(err(format!("unknown record `{other}`"))),
            }
        }
        let rate = rate.ok_or(ImitationError::Parse { line: 0, msg: "missing `rate` header".into() })?;
        Self::new(rate, frames)
    }

    pub fn load(path: &Path) -> Result<Self, ImitationError> {
        let text = std::fs::read_to_string(path).map_err(|e| ImitationError::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn save(&self, path: &Path) -> Result<(), ImitationError> {
        std::fs::write(path, self.to_text()).map_err(|e| ImitationError::Io(format!("{}: {e}", path.display())))
    }
}

/// Largest object deviation (translation, |rotation|) between two clips over
/// their common frames.
pub fn object_deviation(a: &ReferenceClip, b: &ReferenceClip) -> (f64, f64) {
    a.frames
        .iter()
        .zip(&b.frames)
        .fold((0.0, 0.0), |(d, r), (x, y)| {
            (d.max((x.object.pos - y.object.pos).length()), r.max(angle_diff(x.object.angle, y.object.angle).abs()))
        })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn clip() -> ReferenceClip {
        let frames = (0..5)
            .map(|i| ClipFrame {
                hands: vec![HandPose {
                    root: Pose2::new(0.01 * i as f64, 0.0, 3.0 + 0.1 * i as f64),
                    joints: vec![0.1 * i as f64, -0.2],
                }],
                object: Pose2::new(0.0, 0.05, 1.0 / 3.0),
            })
            .collect();
        ReferenceClip::new(120.0, frames).unwrap()
    }

    #[test]
    fn text_round_trip_is_exact() {
        let c = clip();
        assert_eq!(ReferenceClip::parse(&c.to_text()).unwrap(), c);
    }

    #[test]
    fn interpolation_wraps_angles() {
        let c = clip();
        // frames 1 and 2 have root angles 3.1 and 3.2 − 2π
        let f = c.frame_at(1.5 / 120.0);
        assert!(angle_diff(f.hands[0].root.angle, 3.15).abs() < 1e-12);
        assert!((f.hands[0].joints[0] - 0.15).abs() < 1e-12);
        assert_eq!(c.frame_at(-1.0), c.frames()[0]);
        assert_eq!(c.frame_at(99.0), c.frames()[4]);
    }

    #[test]
    fn steps_at_control_rate() {
        let frames = vec![clip().frames()[0].clone(); 480];
        let c = ReferenceClip::new(120.0, frames).unwrap();
        assert_eq!(c.duration(), 4.0);
        assert_eq!(c.steps(30.0), 120);
    }

    #[test]
    fn rejects_short_and_malformed() {
        assert!(ReferenceClip::new(120.0, vec![clip().frames()[0].clone()]).is_err());
        let err = ReferenceClip::parse("rate 120\njoints 2\nf 0 0 0 0.1\n").unwrap_err();
        assert!(matches!(err, ImitationError::Parse { line: 3, .. }));
    }
}
