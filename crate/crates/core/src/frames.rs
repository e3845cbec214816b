//! Weighted frames: the four-sphere model of the imploded double.
//!
//! A frame `q ∈ SU(2)` together with a holonomy angle `t` is stored as the
//! point `(cos πt, sin πt · q)` of S⁴ ⊂ ℝ × ℍ. At `t ∈ {0, 1}` the weight
//! vanishes and the frame is forgotten; the canonical representative is `q = 1`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::su2::{to_alcove, AlcoveAngle, Su2};

/// Weights at or below this are treated as collapsed frames.
pub const WEIGHT_EPS: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FrameJson", into = "FrameJson")]
pub struct WeightedFrame {
    t: f64,
    q: Su2,
}

#[derive(Serialize, Deserialize)]
struct FrameJson {
    t: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    q: Option<Su2>,
}

impl From<WeightedFrame> for FrameJson {
    fn from(f: WeightedFrame) -> FrameJson {
        FrameJson { t: f.t, q: if f.is_pole() { None } else { Some(f.q) } }
    }
}

impl TryFrom<FrameJson> for WeightedFrame {
    type Error = String;

    fn try_from(j: FrameJson) -> Result<Self, String> {
        if !(0.0..=1.0).contains(&j.t) {
            return Err(format!("holonomy angle {} outside [0,1]", j.t));
        }
        if j.t == 0.0 || j.t == 1.0 {
            return Ok(WeightedFrame { t: j.t, q: Su2::ONE });
        }
        match j.q {
            Some(q) => Ok(WeightedFrame { t: j.t, q }),
            None => Err(format!("frame missing at non-polar angle {}", j.t)),
        }
    }
}

impl WeightedFrame {
    pub const NORTH: WeightedFrame = WeightedFrame { t: 0.0, q: Su2::ONE };
    pub const SOUTH: WeightedFrame = WeightedFrame { t: 1.0, q: Su2::ONE };

    /// Collapses `(q, t)` to its S⁴ point; at `t ∈ {0, 1}` the frame is dropped.
    pub fn implode(q: Su2, t: AlcoveAngle) -> WeightedFrame {
        let t = t.value();
        if t <= 0.0 {
            WeightedFrame::NORTH
        } else if t >= 1.0 {
            WeightedFrame::SOUTH
        } else {
            WeightedFrame { t, q }
        }
    }

    /// The frame whose holonomy is `g`, with the conjugator from [`to_alcove`].
    pub fn from_holonomy(g: Su2) -> WeightedFrame {
        let (t, h) = to_alcove(g);
        WeightedFrame::implode(h, t)
    }

    pub fn angle(self) -> AlcoveAngle {
        AlcoveAngle(self.t)
    }

    /// Frame component; `1` at the poles.
    pub fn frame(self) -> Su2 {
        self.q
    }

    pub fn weight(self) -> f64 {
        (PI * self.t).sin()
    }

    pub fn is_pole(self) -> bool {
        self.t == 0.0 || self.t == 1.0
    }

    pub fn is_collapsed(self) -> bool {
        self.weight() <= WEIGHT_EPS
    }

    /// Coordinates `(x0, x1..x4)` in ℝ⁵.
    pub fn s4_point(self) -> [f64; 5] {
        let (s, c) = (PI * self.t).sin_cos();
        [c, s * self.q.w, s * self.q.x, s * self.q.y, s * self.q.z]
    }

    /// Group-valued moment map `q exp(t) q⁻¹`.
    pub fn holonomy(self) -> Su2 {
        if self.t == 0.0 {
            Su2::ONE
        } else if self.t == 1.0 {
            Su2::MINUS_ONE
        } else {
            Su2::torus(self.t).conjugated_by(self.q)
        }
    }

    /// Right action of the torus, `q ↦ q exp(τ)⁻¹`; poles are fixed.
    pub fn torus_action(self, tau: f64) -> WeightedFrame {
        if self.is_pole() {
            return self;
        }
        WeightedFrame { t: self.t, q: (self.q * Su2::torus(-tau)).normalized() }
    }

    /// Left action of the group, `q ↦ g q`; poles are fixed.
    pub fn left_action(self, g: Su2) -> WeightedFrame {
        if self.is_pole() {
            return self;
        }
        WeightedFrame { t: self.t, q: (g * self.q).normalized() }
    }

    pub fn moment_angle(self) -> AlcoveAngle {
        AlcoveAngle(self.t)
    }

    /// Same angle, frame replaced by `-q`.
    pub(crate) fn flipped(self) -> WeightedFrame {
        if self.is_pole() {
            self
        } else {
            WeightedFrame { t: self.t, q: -self.q }
        }
    }

    pub(crate) fn max_diff(self, o: WeightedFrame) -> f64 {
        let (a, b) = (self.s4_point(), o.s4_point());
        a.iter().zip(b.iter()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn quat() -> impl Strategy<Value = Su2> {
        (-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0)
            .prop_filter("nonzero", |(w, x, y, z)| w * w + x * x + y * y + z * z > 1e-3)
            .prop_map(|(w, x, y, z)| Su2::new(w, x, y, z))
    }

    #[test]
    fn implode_examples() {
        let p = WeightedFrame::implode(Su2::I, AlcoveAngle(0.0));
        assert_eq!(p, WeightedFrame::NORTH);
        assert_eq!(p.s4_point(), [1.0, 0.0, 0.0, 0.0, 0.0]);
        let e = WeightedFrame::implode(Su2::ONE, AlcoveAngle(0.5)).s4_point();
        assert!(e[0].abs() < 1e-16 && (e[1] - 1.0).abs() < 1e-16);
        let f = WeightedFrame::implode(Su2::I, AlcoveAngle(0.25)).s4_point();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((f[0] - h).abs() < 1e-15 && (f[2] - h).abs() < 1e-15);
    }

    #[test]
    fn holonomy_examples() {
        let w = WeightedFrame::implode(Su2::ONE, AlcoveAngle(0.5));
        assert!(w.holonomy().max_diff(Su2::K) < 1e-15);
        assert_eq!(WeightedFrame::NORTH.holonomy(), Su2::ONE);
        assert_eq!(WeightedFrame::SOUTH.holonomy(), Su2::MINUS_ONE);
    }

    #[test]
    fn torus_action_examples() {
        assert_eq!(WeightedFrame::SOUTH.torus_action(0.3), WeightedFrame::SOUTH);
        let w = WeightedFrame::implode(Su2::ONE, AlcoveAngle(0.5)).torus_action(0.5);
        assert!(w.frame().max_diff(-Su2::K) < 1e-15);
        assert_eq!(w.angle().0, 0.5);
        let w0 = WeightedFrame::implode(Su2::J, AlcoveAngle(0.2));
        assert!(w0.torus_action(0.0).max_diff(w0) < 1e-16);
    }

    #[test]
    fn left_action_fixes_poles() {
        assert_eq!(WeightedFrame::NORTH.left_action(Su2::J), WeightedFrame::NORTH);
        let w = WeightedFrame::implode(Su2::J, AlcoveAngle(0.3));
        assert_eq!(w.left_action(Su2::ONE), w);
    }

    #[test]
    fn moment_angle_examples() {
        assert_eq!(WeightedFrame::NORTH.moment_angle().0, 0.0);
        assert_eq!(WeightedFrame::SOUTH.moment_angle().0, 1.0);
        assert_eq!(WeightedFrame::implode(Su2::I, AlcoveAngle(0.3)).moment_angle().0, 0.3);
    }

    #[test]
    fn json_omits_frame_at_poles() {
        let s = serde_json::to_string(&WeightedFrame::NORTH).unwrap();
        assert_eq!(s, r#"{"t":0.0}"#);
        let w = WeightedFrame::implode(Su2::J, AlcoveAngle(0.3));
        let back: WeightedFrame = serde_json::from_str(&serde_json::to_string(&w).unwrap()).unwrap();
        assert_eq!(back, w);
        assert!(serde_json::from_str::<WeightedFrame>(r#"{"t":0.4}"#).is_err());
    }

    proptest! {
        #[test]
        fn holonomy_has_the_frame_angle(q in quat(), t in 0.0f64..=1.0) {
            let w = WeightedFrame::implode(q, AlcoveAngle(t));
            let (a, _) = to_alcove(w.holonomy());
            prop_assert!((a.0 - t).abs() < 1e-9);
            prop_assert_eq!(w.moment_angle().0, t);
        }

        #[test]
        fn torus_action_is_a_circle_action(q in quat(), t in 0.01f64..0.99, a in -2.0f64..2.0, b in -2.0f64..2.0) {
            let w = WeightedFrame::implode(q, AlcoveAngle(t));
            let lhs = w.torus_action(a).torus_action(b);
            let rhs = w.torus_action(a + b);
            prop_assert!(lhs.max_diff(rhs) < 1e-12);
            prop_assert!(w.torus_action(2.0).max_diff(w) < 1e-12);
            prop_assert!(w.torus_action(a).holonomy().max_diff(w.holonomy()) < 1e-12);
        }

        #[test]
        fn actions_commute_and_preserve_norm(q in quat(), g in quat(), t in 0.0f64..=1.0, tau in -2.0f64..2.0) {
            let w = WeightedFrame::implode(q, AlcoveAngle(t));
            let a = w.left_action(g).torus_action(tau);
            let b = w.torus_action(tau).left_action(g);
            prop_assert!(a.max_diff(b) < 1e-12);
            let n: f64 = a.s4_point().iter().map(|x| x * x).sum();
            prop_assert!((n - 1.0).abs() < 1e-12);
            let conj = w.holonomy().conjugated_by(g);
            prop_assert!(w.left_action(g).holonomy().max_diff(conj) < 1e-10);
        }

        #[test]
        fn implode_inverts_extraction(q in quat(), t in 0.001f64..0.999) {
            let w = WeightedFrame::implode(q, AlcoveAngle(t));
            let again = WeightedFrame::implode(w.frame(), w.angle());
            prop_assert_eq!(again, w);
        }
    }
}
