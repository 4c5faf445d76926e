//! Synthetic scenes of piecewise-constant objects with exact ground truth.
//!
//! A motion scene has two images: every object moves by `(dx, dy)` and
//! scales by `s` about its center. A depth scene has a reference view plus
//! one view per baseline; every object sits on a fronto-parallel plane at
//! depth `z` and shifts by `focal * baseline / z`. Objects are drawn in
//! list order, later ones on top.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::image::{Dims, Image};
use crate::kv::KvConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shape {
    Rect,
    Ellipse,
}

impl std::str::FromStr for Shape {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rect" => Ok(Shape::Rect),
            "ellipse" => Ok(Shape::Ellipse),
            other => Err(Error::invalid(
                "object shape",
                format!("`{other}`, expected rect or ellipse"),
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneObject {
    pub shape: Shape,
    pub cx: f64,
    pub cy: f64,
    pub width: f64,
    pub height: f64,
    pub intensity: f64,
    /// Motion scenes: translation and scale in the second image.
    pub motion: (f64, f64, f64),
    /// Depth scenes: distance from the camera line.
    pub depth: f64,
}

impl SceneObject {
    fn covers(&self, x: f64, y: f64, cx: f64, cy: f64, scale: f64) -> bool {
        let u = (x - cx) / (0.5 * self.width * scale);
        let v = (y - cy) / (0.5 * self.height * scale);
        match self.shape {
            Shape::Rect => u.abs() <= 1.0 && v.abs() <= 1.0,
            Shape::Ellipse => u * u + v * v <= 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SceneKind {
    Motion,
    Depth {
        focal: f64,
        baselines: Vec<f64>,
        /// `f64::INFINITY` keeps the background still in every view.
        background_depth: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneSpec {
    pub dims: Dims,
    pub kind: SceneKind,
    pub background: f64,
    /// Amplitude of a smooth sinusoidal texture on the background.
    pub background_texture: f64,
    pub objects: Vec<SceneObject>,
    /// Standard deviation of additive Gaussian noise.
    pub noise: f64,
    pub seed: u64,
}

/// Rendered views plus the ground truth on the reference grid.
#[derive(Debug, Clone)]
pub struct Scene {
    pub views: Vec<Image<f64>>,
    /// Forward displacement of every reference pixel, one field per
    /// non-reference view.
    pub motion_h: Vec<Image<f64>>,
    pub motion_v: Vec<Image<f64>>,
    /// Depth scenes: inverse depth of every reference pixel (0 at infinity).
    pub inv_depth: Option<Image<f64>>,
}

impl SceneSpec {
    /// Keys: `scene.rows`, `scene.cols`, `scene.kind` (`motion` or
    /// `depth`), `scene.background`, `scene.background_texture`,
    /// `scene.noise`, `scene.seed`, `scene.objects` (count), then per object
    /// `scene.object.N = shape, cx, cy, width, height, intensity` with
    /// `scene.object.N.motion = dx, dy, scale` or `scene.object.N.depth`.
    /// Depth scenes also read `scene.focal`, `scene.baselines` and
    /// `scene.background_depth`.
    pub fn from_kv(kv: &KvConfig) -> Result<Self> {
        let dims = Dims::new(kv.require("scene.rows")?, kv.require("scene.cols")?);
        let kind = match kv.get_or("scene.kind", String::from("motion"))?.as_str() {
            "motion" => SceneKind::Motion,
            "depth" => SceneKind::Depth {
                focal: kv.require("scene.focal")?,
                baselines: kv.get_list("scene.baselines")?,
                background_depth: kv.get_or("scene.background_depth", f64::INFINITY)?,
            },
            other => return Err(Error::invalid("scene kind", other.to_string())),
        };
        let count: usize = kv.require("scene.objects")?;
        let mut objects = Vec::with_capacity(count);
        for n in 0..count {
            let key = format!("scene.object.{n}");
            let raw = kv
                .raw(&key)
                .ok_or_else(|| Error::invalid("scene", format!("missing key `{key}`")))?;
            let parts: Vec<&str> = raw.split(',').map(str::trim).collect();
            if parts.len() != 6 {
                return Err(Error::invalid("scene", format!("`{key}` needs 6 fields")));
            }
            let num = |i: usize| -> Result<f64> {
                parts[i]
                    .parse()
                    .map_err(|_| Error::invalid("scene", format!("`{key}`: bad number `{}`", parts[i])))
            };
            let motion: Vec<f64> = kv.get_list(&format!("{key}.motion"))?;
            let motion = match motion.len() {
                0 => (0.0, 0.0, 1.0),
                3 => (motion[0], motion[1], motion[2]),
                _ => return Err(Error::invalid("scene", format!("`{key}.motion` needs dx, dy, scale"))),
            };
            objects.push(SceneObject {
                shape: parts[0].parse()?,
                cx: num(1)?,
                cy: num(2)?,
                width: num(3)?,
                height: num(4)?,
                intensity: num(5)?,
                motion,
                depth: kv.get_or(&format!("{key}.depth"), f64::INFINITY)?,
            });
        }
        let spec = SceneSpec {
            dims,
            kind,
            background: kv.get_or("scene.background", 0.0)?,
            background_texture: kv.get_or("scene.background_texture", 0.0)?,
            objects,
            noise: kv.get_or("scene.noise", 0.0)?,
            seed: kv.get_or("scene.seed", 1)?,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dims.is_empty() {
            return Err(Error::invalid("scene", "empty image"));
        }
        if !(self.noise >= 0.0 && self.noise.is_finite()) {
            return Err(Error::invalid("scene", "noise must be finite and >= 0"));
        }
        for o in &self.objects {
            if !(o.width > 0.0 && o.height > 0.0 && o.motion.2 > 0.0) {
                return Err(Error::invalid("scene", "object sizes and scales must be > 0"));
            }
        }
        if let SceneKind::Depth {
            focal,
            baselines,
            background_depth,
        } = &self.kind
        {
            if baselines.is_empty() || !(*focal > 0.0) || !(*background_depth > 0.0) {
                return Err(Error::invalid("scene", "depth scenes need focal > 0 and baselines"));
            }
            if self.objects.iter().any(|o| !(o.depth > 0.0 && o.depth.is_finite())) {
                return Err(Error::invalid("scene", "every object needs a finite depth > 0"));
            }
        }
        Ok(())
    }

    pub fn view_count(&self) -> usize {
        match &self.kind {
            SceneKind::Motion => 2,
            SceneKind::Depth { baselines, .. } => 1 + baselines.len(),
        }
    }

    /// Center shift and scale of object `o` in view `view` (0 = reference).
    fn placement(&self, o: &SceneObject, view: usize) -> (f64, f64, f64) {
        if view == 0 {
            return (0.0, 0.0, 1.0);
        }
        match &self.kind {
            SceneKind::Motion => o.motion,
            SceneKind::Depth { focal, baselines, .. } => (focal * baselines[view - 1] / o.depth, 0.0, 1.0),
        }
    }

    fn background_shift(&self, view: usize) -> f64 {
        match &self.kind {
            SceneKind::Depth {
                focal,
                baselines,
                background_depth,
            } if view > 0 && background_depth.is_finite() => focal * baselines[view - 1] / background_depth,
            _ => 0.0,
        }
    }

    fn background_at(&self, x: f64, y: f64) -> f64 {
        let (w, h) = (self.dims.cols as f64, self.dims.rows as f64);
        let t = (2.0 * std::f64::consts::PI * (x / w * 3.0)).sin() * (2.0 * std::f64::consts::PI * (y / h * 2.0)).cos();
        self.background + self.background_texture * t
    }

    /// Topmost object drawn at pixel `(x, y)` of view `view`.
    fn object_at(&self, x: f64, y: f64, view: usize) -> Option<usize> {
        (0..self.objects.len()).rev().find(|&n| {
            let o = &self.objects[n];
            let (dx, dy, s) = self.placement(o, view);
            o.covers(x, y, o.cx + dx, o.cy + dy, s)
        })
    }

    pub fn render(&self) -> Result<Scene> {
        self.validate()?;
        let dims = self.dims;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let noise = Normal::new(0.0, self.noise).map_err(|e| Error::invalid("scene noise", e.to_string()))?;
        let mut views = Vec::with_capacity(self.view_count());
        for view in 0..self.view_count() {
            let bshift = self.background_shift(view);
            let mut img = Image::from_fn(dims, |x, y| {
                let (xf, yf) = (x as f64, y as f64);
                match self.object_at(xf, yf, view) {
                    Some(n) => self.objects[n].intensity,
                    None => self.background_at(xf - bshift, yf),
                }
            });
            if self.noise > 0.0 {
                for v in img.as_mut_slice() {
                    *v += noise.sample(&mut rng);
                }
            }
            for v in img.as_mut_slice() {
                *v = v.round().clamp(0.0, 255.0);
            }
            views.push(img);
        }
        let mut motion_h = Vec::new();
        let mut motion_v = Vec::new();
        for view in 1..self.view_count() {
            let bshift = self.background_shift(view);
            let mut mh = Image::zeros(dims);
            let mut mv = Image::zeros(dims);
            for y in 0..dims.rows {
                for x in 0..dims.cols {
                    let (xf, yf) = (x as f64, y as f64);
                    let (h, v) = match self.object_at(xf, yf, 0) {
                        Some(n) => {
                            let o = &self.objects[n];
                            let (dx, dy, s) = self.placement(o, view);
                            (o.cx + dx + s * (xf - o.cx) - xf, o.cy + dy + s * (yf - o.cy) - yf)
                        }
                        None => (bshift, 0.0),
                    };
                    mh.set(x, y, h);
                    mv.set(x, y, v);
                }
            }
            motion_h.push(mh);
            motion_v.push(mv);
        }
        let inv_depth = match &self.kind {
            SceneKind::Motion => None,
            SceneKind::Depth { background_depth, .. } => Some(Image::from_fn(dims, |x, y| {
                match self.object_at(x as f64, y as f64, 0) {
                    Some(n) => 1.0 / self.objects[n].depth,
                    None => 1.0 / background_depth,
                }
            })),
        };
        Ok(Scene {
            views,
            motion_h,
            motion_v,
            inv_depth,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square_scene() -> SceneSpec {
        SceneSpec {
            dims: Dims::new(20, 30),
            kind: SceneKind::Motion,
            background: 20.0,
            background_texture: 0.0,
            objects: vec![SceneObject {
                shape: Shape::Rect,
                cx: 10.0,
                cy: 10.0,
                width: 6.0,
                height: 6.0,
                intensity: 200.0,
                motion: (3.0, 0.0, 1.0),
                depth: f64::INFINITY,
            }],
            noise: 0.0,
            seed: 1,
        }
    }

    #[test]
    fn shifted_square_ground_truth() {
        let s = square_scene().render().unwrap();
        for y in 0..20 {
            for x in 0..30 {
                let inside = (7..=13).contains(&x) && (7..=13).contains(&y);
                assert_eq!(s.motion_h[0].get(x, y), if inside { 3.0 } else { 0.0 });
                assert_eq!(s.motion_v[0].get(x, y), 0.0);
                assert_eq!(s.views[0].get(x, y), if inside { 200.0 } else { 20.0 });
                let moved = (10..=16).contains(&x) && (7..=13).contains(&y);
                assert_eq!(s.views[1].get(x, y), if moved { 200.0 } else { 20.0 });
            }
        }
    }

    #[test]
    fn noise_is_seeded() {
        let spec = SceneSpec {
            noise: 4.0,
            ..square_scene()
        };
        let a = spec.render().unwrap();
        let b = spec.render().unwrap();
        assert_eq!(a.views, b.views);
        let c = SceneSpec { seed: 2, ..spec }.render().unwrap();
        assert_ne!(a.views[0], c.views[0]);
    }

    #[test]
    fn later_objects_are_on_top() {
        let mut spec = square_scene();
        let mut top = spec.objects[0].clone();
        top.cx = 12.0;
        top.intensity = 90.0;
        top.motion = (0.0, 0.0, 1.0);
        spec.objects.push(top);
        let s = spec.render().unwrap();
        assert_eq!(s.views[0].get(12, 10), 90.0);
        assert_eq!(s.motion_h[0].get(12, 10), 0.0);
        assert_eq!(s.motion_h[0].get(8, 10), 3.0);
    }

    #[test]
    fn depth_scene_disparities() {
        let mut kv = KvConfig::new();
        for (k, v) in [
            ("scene.rows", "16"),
            ("scene.cols", "40"),
            ("scene.kind", "depth"),
            ("scene.focal", "8"),
            ("scene.baselines", "1, -1"),
            ("scene.objects", "1"),
            ("scene.object.0", "rect, 20, 8, 8, 6, 180"),
            ("scene.object.0.depth", "2"),
            ("scene.background", "30"),
        ] {
            kv.set(k, v);
        }
        let spec = SceneSpec::from_kv(&kv).unwrap();
        let s = spec.render().unwrap();
        assert_eq!(s.views.len(), 3);
        assert_eq!(s.motion_h[0].get(20, 8), 4.0);
        assert_eq!(s.motion_h[1].get(20, 8), -4.0);
        assert_eq!(s.motion_h[0].get(2, 2), 0.0);
        assert_eq!(s.inv_depth.unwrap().get(20, 8), 0.5);
        assert_eq!(s.views[1].get(28, 8), 180.0);
        assert_eq!(s.views[2].get(12, 8), 180.0);
    }
}
