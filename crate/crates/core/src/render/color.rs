use crate::model::ElementKind;

use super::RenderError;

pub const BASE_LIGHTNESS: f64 = 0.30;
pub const MAX_LIGHTNESS: f64 = 0.85;
pub const CONCEPT_HUE: f64 = 210.0;
pub const RELATION_HUE: f64 = 30.0;
pub const SATURATION: f64 = 0.55;

/// Fill color in HSL; only lightness carries the criterion value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ColorSpec {
    pub hue: f64,
    pub saturation: f64,
    pub lightness: f64,
}

impl ColorSpec {
    pub fn base(kind: ElementKind) -> Self {
        colorize(0.0, kind).expect("0 is in range")
    }

    /// `#rrggbb`.
    pub fn hex(&self) -> String {
        let (r, g, b) = hsl_to_rgb(self.hue, self.saturation, self.lightness);
        format!("#{r:02x}{g:02x}{b:02x}")
    }

    /// Black or white, whichever reads better on this fill.
    pub fn text_hex(&self) -> &'static str {
        if self.lightness > 0.6 {
            "#000000"
        } else {
            "#ffffff"
        }
    }
}

/// Maps a normalized criterion value onto lightness in [0.30, 0.85].
pub fn colorize(norm: f64, kind: ElementKind) -> Result<ColorSpec, RenderError> {
    if !(0.0..=1.0).contains(&norm) {
        return Err(RenderError::NormOutOfRange(norm));
    }
    let hue = match kind {
        ElementKind::Concept => CONCEPT_HUE,
        ElementKind::Relation => RELATION_HUE,
    };
    Ok(ColorSpec {
        hue,
        saturation: SATURATION,
        lightness: BASE_LIGHTNESS * (1.0 - norm) + MAX_LIGHTNESS * norm,
    })
}

fn hsl_to_rgb(h: f64, s: f64, l: f64) -> (u8, u8, u8) {
    let c = (1.0 - (2.0 * l - 1.0).abs()) * s;
    let hp = (h.rem_euclid(360.0)) / 60.0;
    let x = c * (1.0 - (hp % 2.0 - 1.0).abs());
    let (r, g, b) = match hp as u32 {
        0 => (c, x, 0.0),
        1 => (x, c, 0.0),
        2 => (0.0, c, x),
        3 => (0.0, x, c),
        4 => (x, 0.0, c),
        _ => (c, 0.0, x),
    };
    let m = l - c / 2.0;
    let to = |v: f64| ((v + m) * 255.0).round().clamp(0.0, 255.0) as u8;
    (to(r), to(g), to(b))
}
