//! Synthetic scene rendering with analytically known pixel counts.
//!
//! Scenes provide the area ground truth for segmentation tests and the CLI:
//! axis-aligned rectangles cover exactly `w*h` pixels, and disks are
//! rasterized by the center-of-pixel rule, so an independent per-pixel
//! distance test reproduces their count.
//!
//! Plain-text scene config, one directive per line (`#` comments allowed):
//!
//! ```text
//! canvas 200 200 255 255 255
//! rect 80 80 40 40 30 180 40
//! disk 100 100 35.5 30 180 40
//! ```
//!
//! `canvas W H R G B` must come first; `rect x y w h R G B` and
//! `disk cx cy radius R G B` follow in paint order (later shapes overdraw
//! earlier ones).

use crate::error::{Error, Result};
use crate::image::{Image, Rgb};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, PartialEq)]
pub struct SceneSpec {
    pub width: u32,
    pub height: u32,
    pub background: Rgb,
    pub shapes: Vec<Shape>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Shape {
    pub kind: ShapeKind,
    pub fill: Rgb,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ShapeKind {
    Rect { x: u32, y: u32, w: u32, h: u32 },
    Disk { cx: f64, cy: f64, radius: f64 },
}

impl ShapeKind {
    /// Center-of-pixel containment test.
    pub fn contains(&self, px: u32, py: u32) -> bool {
        match *self {
            ShapeKind::Rect { x, y, w, h } => px >= x && px < x + w && py >= y && py < y + h,
            ShapeKind::Disk { cx, cy, radius } => {
                let dx = f64::from(px) + 0.5 - cx;
                let dy = f64::from(py) + 0.5 - cy;
                dx * dx + dy * dy <= radius * radius
            }
        }
    }

    fn fits(&self, width: u32, height: u32) -> bool {
        match *self {
            ShapeKind::Rect { x, y, w, h } => {
                w >= 1
                    && h >= 1
                    && x.checked_add(w).is_some_and(|xe| xe <= width)
                    && y.checked_add(h).is_some_and(|ye| ye <= height)
            }
            ShapeKind::Disk { cx, cy, radius } => {
                radius > 0.0
                    && cx - radius >= 0.0
                    && cy - radius >= 0.0
                    && cx + radius <= f64::from(width)
                    && cy + radius <= f64::from(height)
            }
        }
    }
}

impl SceneSpec {
    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(Error::NonPositive {
                name: "canvas dimension",
                value: 0.0,
            });
        }
        for (index, shape) in self.shapes.iter().enumerate() {
            if !shape.kind.fits(self.width, self.height) {
                return Err(Error::ShapeOutOfCanvas {
                    index,
                    width: self.width,
                    height: self.height,
                });
            }
        }
        Ok(())
    }

    /// Parses the plain-text scene config described in the module docs.
    pub fn parse(text: &str) -> Result<Self> {
        let mut spec: Option<SceneSpec> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |reason: String| Error::Format {
                what: "scene",
                line: idx + 1,
                reason,
            };
            let mut fields = line.split_whitespace();
            let directive = fields.next().unwrap();
            let rest: Vec<&str> = fields.collect();
            match directive {
                "canvas" => {
                    if spec.is_some() {
                        return Err(err("duplicate canvas directive".into()));
                    }
                    let [w, h, r, g, b] = take::<5>(&rest)
                        .map_err(|n| err(format!("canvas expects 5 values, got {n}")))?;
                    spec = Some(SceneSpec {
                        width: parse_num(w).map_err(|_| err(format!("bad canvas width {w:?}")))?,
                        height: parse_num(h)
                            .map_err(|_| err(format!("bad canvas height {h:?}")))?,
                        background: parse_color(r, g, b)
                            .map_err(|f| err(format!("bad color component {f:?}")))?,
                        shapes: Vec::new(),
                    });
                }
                "rect" => {
                    let spec = spec
                        .as_mut()
                        .ok_or_else(|| err("canvas must come first".into()))?;
                    let [x, y, w, h, r, g, b] = take::<7>(&rest)
                        .map_err(|n| err(format!("rect expects 7 values, got {n}")))?;
                    spec.shapes.push(Shape {
                        kind: ShapeKind::Rect {
                            x: parse_num(x).map_err(|_| err(format!("bad rect x {x:?}")))?,
                            y: parse_num(y).map_err(|_| err(format!("bad rect y {y:?}")))?,
                            w: parse_num(w).map_err(|_| err(format!("bad rect w {w:?}")))?,
                            h: parse_num(h).map_err(|_| err(format!("bad rect h {h:?}")))?,
                        },
                        fill: parse_color(r, g, b)
                            .map_err(|f| err(format!("bad color component {f:?}")))?,
                    });
                }
                "disk" => {
                    let spec = spec
                        .as_mut()
                        .ok_or_else(|| err("canvas must come first".into()))?;
                    let [cx, cy, rad, r, g, b] = take::<6>(&rest)
                        .map_err(|n| err(format!("disk expects 6 values, got {n}")))?;
                    spec.shapes.push(Shape {
                        kind: ShapeKind::Disk {
                            cx: parse_float(cx).map_err(|_| err(format!("bad disk cx {cx:?}")))?,
                            cy: parse_float(cy).map_err(|_| err(format!("bad disk cy {cy:?}")))?,
                            radius: parse_float(rad)
                                .map_err(|_| err(format!("bad disk radius {rad:?}")))?,
                        },
                        fill: parse_color(r, g, b)
                            .map_err(|f| err(format!("bad color component {f:?}")))?,
                    });
                }
                other => return Err(err(format!("unknown directive {other:?}"))),
            }
        }
        let spec = spec.ok_or(Error::Format {
            what: "scene",
            line: 0,
            reason: "missing canvas directive".into(),
        })?;
        spec.validate()?;
        Ok(spec)
    }
}

fn take<'a, const N: usize>(fields: &[&'a str]) -> std::result::Result<[&'a str; N], usize> {
    if fields.len() == N {
        let mut out = [""; N];
        out.copy_from_slice(fields);
        Ok(out)
    } else {
        Err(fields.len())
    }
}

fn parse_num(s: &str) -> std::result::Result<u32, ()> {
    s.parse().map_err(|_| ())
}

fn parse_float(s: &str) -> std::result::Result<f64, ()> {
    let v: f64 = s.parse().map_err(|_| ())?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(())
    }
}

fn parse_color(r: &str, g: &str, b: &str) -> std::result::Result<Rgb, String> {
    let parse = |s: &str| s.parse::<u8>().map_err(|_| s.to_string());
    Ok([parse(r)?, parse(g)?, parse(b)?])
}

/// Rasterizes the scene: background first, then shapes in paint order.
pub fn render_scene(spec: &SceneSpec) -> Result<Image> {
    spec.validate()?;
    let mut img = Image::new(spec.width, spec.height, spec.background)?;
    for shape in &spec.shapes {
        match shape.kind {
            ShapeKind::Rect { x, y, w, h } => {
                for py in y..y + h {
                    for px in x..x + w {
                        img.set_pixel(px, py, shape.fill);
                    }
                }
            }
            ShapeKind::Disk { cx, cy, radius } => {
                let x0 = (cx - radius).floor().max(0.0) as u32;
                let x1 = ((cx + radius).ceil() as u32).min(spec.width);
                let y0 = (cy - radius).floor().max(0.0) as u32;
                let y1 = ((cy + radius).ceil() as u32).min(spec.height);
                for py in y0..y1 {
                    for px in x0..x1 {
                        if shape.kind.contains(px, py) {
                            img.set_pixel(px, py, shape.fill);
                        }
                    }
                }
            }
        }
    }
    Ok(img)
}

/// Parallel [`render_scene`], split by rows. Each row paints its
/// intersection with every shape's bounding box in paint order, so the
/// output is pixel-identical to sequential overdraw at the same total cost.
#[cfg(feature = "parallel")]
pub fn render_scene_par(spec: &SceneSpec) -> Result<Image> {
    spec.validate()?;
    let width = spec.width as usize;
    let mut pixels: Vec<Rgb> = vec![spec.background; width * spec.height as usize];
    pixels
        .par_chunks_mut(width)
        .enumerate()
        .for_each(|(py, row)| {
            let py = py as u32;
            for shape in &spec.shapes {
                let (x0, x1) = match shape.kind {
                    ShapeKind::Rect { x, y, w, h } => {
                        if py < y || py >= y + h {
                            continue;
                        }
                        (x, x + w)
                    }
                    ShapeKind::Disk { cx, cy, radius } => {
                        let dy = (f64::from(py) + 0.5 - cy).abs();
                        if dy > radius {
                            continue;
                        }
                        let x0 = (cx - radius).floor().max(0.0) as u32;
                        let x1 = ((cx + radius).ceil() as u32).min(spec.width);
                        (x0, x1)
                    }
                };
                for px in x0..x1 {
                    if shape.kind.contains(px, py) {
                        row[px as usize] = shape.fill;
                    }
                }
            }
        });
    Image::from_pixels(spec.width, spec.height, pixels)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn green_square_scene() -> SceneSpec {
        SceneSpec {
            width: 200,
            height: 200,
            background: [255, 255, 255],
            shapes: vec![Shape {
                kind: ShapeKind::Rect {
                    x: 80,
                    y: 80,
                    w: 40,
                    h: 40,
                },
                fill: [30, 180, 40],
            }],
        }
    }

    #[test]
    fn empty_scene_is_uniform_background() {
        let spec = SceneSpec {
            width: 10,
            height: 5,
            background: [7, 8, 9],
            shapes: vec![],
        };
        let img = render_scene(&spec).unwrap();
        assert!(img.pixels().iter().all(|&p| p == [7, 8, 9]));
    }

    #[test]
    fn rectangle_covers_exactly_w_times_h() {
        let img = render_scene(&green_square_scene()).unwrap();
        let n = img.pixels().iter().filter(|&&p| p == [30, 180, 40]).count();
        assert_eq!(n, 1600);
    }

    #[test]
    fn disk_count_matches_per_pixel_oracle() {
        let spec = SceneSpec {
            width: 200,
            height: 200,
            background: [0, 0, 0],
            shapes: vec![Shape {
                kind: ShapeKind::Disk {
                    cx: 100.0,
                    cy: 100.0,
                    radius: 50.0,
                },
                fill: [10, 220, 10],
            }],
        };
        let img = render_scene(&spec).unwrap();
        let rendered = img.pixels().iter().filter(|&&p| p == [10, 220, 10]).count();

        // Independent brute-force count over every pixel center.
        let mut oracle = 0usize;
        for py in 0..200u32 {
            for px in 0..200u32 {
                let dx = f64::from(px) + 0.5 - 100.0;
                let dy = f64::from(py) + 0.5 - 100.0;
                if dx * dx + dy * dy <= 50.0 * 50.0 {
                    oracle += 1;
                }
            }
        }
        assert_eq!(rendered, oracle);
    }

    #[test]
    fn later_shapes_overdraw_earlier_ones() {
        let spec = SceneSpec {
            width: 10,
            height: 10,
            background: [0, 0, 0],
            shapes: vec![
                Shape {
                    kind: ShapeKind::Rect {
                        x: 0,
                        y: 0,
                        w: 10,
                        h: 10,
                    },
                    fill: [1, 1, 1],
                },
                Shape {
                    kind: ShapeKind::Rect {
                        x: 2,
                        y: 2,
                        w: 4,
                        h: 4,
                    },
                    fill: [2, 2, 2],
                },
            ],
        };
        let img = render_scene(&spec).unwrap();
        assert_eq!(img.pixel(3, 3), [2, 2, 2]);
        assert_eq!(img.pixel(8, 8), [1, 1, 1]);
    }

    #[test]
    fn shape_out_of_canvas_is_rejected() {
        let spec = SceneSpec {
            width: 50,
            height: 50,
            background: [0, 0, 0],
            shapes: vec![Shape {
                kind: ShapeKind::Rect {
                    x: 40,
                    y: 0,
                    w: 20,
                    h: 5,
                },
                fill: [1, 1, 1],
            }],
        };
        assert!(matches!(
            render_scene(&spec),
            Err(Error::ShapeOutOfCanvas { index: 0, .. })
        ));

        let disk = SceneSpec {
            width: 50,
            height: 50,
            background: [0, 0, 0],
            shapes: vec![Shape {
                kind: ShapeKind::Disk {
                    cx: 5.0,
                    cy: 5.0,
                    radius: 6.0,
                },
                fill: [1, 1, 1],
            }],
        };
        assert!(disk.validate().is_err());
    }

    #[test]
    fn parse_roundtrips_the_documented_example() {
        let text = "# demo\ncanvas 200 200 255 255 255\nrect 80 80 40 40 30 180 40\ndisk 100 100 35.5 30 180 40\n";
        let spec = SceneSpec::parse(text).unwrap();
        assert_eq!(spec.width, 200);
        assert_eq!(spec.shapes.len(), 2);
        assert_eq!(
            spec.shapes[1].kind,
            ShapeKind::Disk {
                cx: 100.0,
                cy: 100.0,
                radius: 35.5
            }
        );
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let err = SceneSpec::parse("canvas 10 10 0 0 0\nrect 1 2 3\n").unwrap_err();
        match err {
            Error::Format { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        assert!(SceneSpec::parse("rect 0 0 1 1 0 0 0\n").is_err());
        assert!(SceneSpec::parse("").is_err());
        assert!(SceneSpec::parse("canvas 10 10 0 0 0\nblob 1\n").is_err());
    }

    #[cfg(feature = "parallel")]
    #[test]
    fn parallel_render_matches_sequential() {
        let mut spec = green_square_scene();
        spec.shapes.push(Shape {
            kind: ShapeKind::Disk {
                cx: 60.5,
                cy: 120.0,
                radius: 23.25,
            },
            fill: [200, 30, 30],
        });
        assert_eq!(
            render_scene(&spec).unwrap(),
            render_scene_par(&spec).unwrap()
        );
    }
}
