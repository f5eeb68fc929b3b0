//! Minimal deterministic SVG plotting.
//!
//! Output is a pure function of the input report, so identical reports give
//! byte-identical image files. Coordinates are rounded to two decimals.

use dikt_core::eval::{CaseStudyRow, CurvePoint, KCDifficultyPoint};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 60.0;

struct Frame {
    x_min: f64,
    x_max: f64,
    y_min: f64,
    y_max: f64,
}

impl Frame {
    fn x(&self, v: f64) -> f64 {
        MARGIN + (v - self.x_min) / (self.x_max - self.x_min) * (WIDTH - 2.0 * MARGIN)
    }

    fn y(&self, v: f64) -> f64 {
        HEIGHT - MARGIN - (v - self.y_min) / (self.y_max - self.y_min) * (HEIGHT - 2.0 * MARGIN)
    }
}

struct Svg {
    body: String,
}

impl Svg {
    fn new() -> Svg {
        let mut body = String::new();
        body.push_str(&format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
             viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
        ));
        body.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
        Svg { body }
    }

    fn line(&mut self, x1: f64, y1: f64, x2: f64, y2: f64, stroke: &str, dashed: bool) {
        let dash = if dashed {
            " stroke-dasharray=\"6,4\""
        } else {
            ""
        };
        self.body.push_str(&format!(
            "<line x1=\"{x1:.2}\" y1=\"{y1:.2}\" x2=\"{x2:.2}\" y2=\"{y2:.2}\" \
             stroke=\"{stroke}\" stroke-width=\"1.5\"{dash}/>\n"
        ));
    }

    fn circle(&mut self, x: f64, y: f64, r: f64, fill: &str) {
        self.body.push_str(&format!(
            "<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"{r:.2}\" fill=\"{fill}\" \
             fill-opacity=\"0.6\" stroke=\"{fill}\"/>\n"
        ));
    }

    fn polyline(&mut self, points: &[(f64, f64)], stroke: &str) {
        let coords: Vec<String> = points
            .iter()
            .map(|(x, y)| format!("{x:.2},{y:.2}"))
            .collect();
        self.body.push_str(&format!(
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{stroke}\" stroke-width=\"2\"/>\n",
            coords.join(" ")
        ));
    }

    fn text(&mut self, x: f64, y: f64, size: u32, content: &str) {
        self.body.push_str(&format!(
            "<text x=\"{x:.2}\" y=\"{y:.2}\" font-family=\"sans-serif\" font-size=\"{size}\">{}</text>\n",
            escape(content)
        ));
    }

    fn axes(&mut self, frame: &Frame, x_label: &str, y_label: &str) {
        self.line(
            MARGIN,
            HEIGHT - MARGIN,
            WIDTH - MARGIN,
            HEIGHT - MARGIN,
            "black",
            false,
        );
        self.line(MARGIN, MARGIN, MARGIN, HEIGHT - MARGIN, "black", false);
        self.text(WIDTH / 2.0 - 40.0, HEIGHT - 15.0, 13, x_label);
        self.body.push_str(&format!(
            "<text x=\"18\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"13\" \
             transform=\"rotate(-90 18 {:.2})\">{}</text>\n",
            HEIGHT / 2.0 + 40.0,
            HEIGHT / 2.0 + 40.0,
            escape(y_label)
        ));
        for i in 0..=4 {
            let fx = frame.x_min + (frame.x_max - frame.x_min) * i as f64 / 4.0;
            let fy = frame.y_min + (frame.y_max - frame.y_min) * i as f64 / 4.0;
            self.text(
                frame.x(fx) - 10.0,
                HEIGHT - MARGIN + 18.0,
                10,
                &format!("{fx:.2}"),
            );
            self.text(MARGIN - 38.0, frame.y(fy) + 4.0, 10, &format!("{fy:.2}"));
        }
    }

    fn finish(mut self) -> String {
        self.body.push_str("</svg>\n");
        self.body
    }
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// Predicted-vs-empirical KC difficulty: identity line dashed, least-squares
/// fit solid, point area tracking the sample count.
pub fn difficulty_scatter(points: &[KCDifficultyPoint], r: f64) -> String {
    let frame = Frame {
        x_min: 0.0,
        x_max: 1.0,
        y_min: 0.0,
        y_max: 1.0,
    };
    let mut svg = Svg::new();
    svg.axes(
        &frame,
        "empirical KC difficulty",
        "predicted difficulty (normalized)",
    );
    svg.line(
        frame.x(0.0),
        frame.y(0.0),
        frame.x(1.0),
        frame.y(1.0),
        "gray",
        true,
    );

    // least-squares fit of predicted on ground truth
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.ground_truth).sum::<f64>() / n;
    let my = points.iter().map(|p| p.predicted_normalized).sum::<f64>() / n;
    let sxy: f64 = points
        .iter()
        .map(|p| (p.ground_truth - mx) * (p.predicted_normalized - my))
        .sum();
    let sxx: f64 = points
        .iter()
        .map(|p| (p.ground_truth - mx) * (p.ground_truth - mx))
        .sum();
    if sxx > 0.0 {
        let slope = sxy / sxx;
        let intercept = my - slope * mx;
        svg.line(
            frame.x(0.0),
            frame.y(intercept.clamp(0.0, 1.0)),
            frame.x(1.0),
            frame.y((slope + intercept).clamp(0.0, 1.0)),
            "steelblue",
            false,
        );
    }
    let max_count = points.iter().map(|p| p.sample_count).max().unwrap_or(1) as f64;
    for p in points {
        let radius = 2.5 + 6.0 * (p.sample_count as f64 / max_count).sqrt();
        svg.circle(
            frame.x(p.ground_truth),
            frame.y(p.predicted_normalized),
            radius,
            "steelblue",
        );
    }
    svg.text(
        MARGIN + 8.0,
        MARGIN - 8.0,
        13,
        &format!("pearson r = {r:.3}"),
    );
    svg.finish()
}

/// Mean mastery against occurrence index for one KC.
pub fn learning_curve_plot(kc_id: &str, curve: &[CurvePoint]) -> String {
    let max_x = curve.iter().map(|p| p.occurrence_index).max().unwrap_or(1) as f64;
    let frame = Frame {
        x_min: 1.0,
        x_max: max_x.max(2.0),
        y_min: 0.0,
        y_max: 1.0,
    };
    let mut svg = Svg::new();
    svg.axes(&frame, "occurrence index", "mean mastery");
    let pts: Vec<(f64, f64)> = curve
        .iter()
        .map(|p| (frame.x(p.occurrence_index as f64), frame.y(p.mean_mastery)))
        .collect();
    svg.polyline(&pts, "seagreen");
    for (p, (x, y)) in curve.iter().zip(&pts) {
        svg.circle(*x, *y, 3.5, "seagreen");
        svg.text(*x - 8.0, *y - 9.0, 9, &format!("n={}", p.count));
    }
    svg.text(MARGIN + 8.0, MARGIN - 8.0, 13, kc_id);
    svg.finish()
}

/// Ability and difficulty trajectories across one dialogue's labeled pairs.
pub fn dialogue_curve_plot(dialogue_id: &str, rows: &[CaseStudyRow]) -> String {
    let max_x = rows.iter().map(|r| r.pair_index).max().unwrap_or(1) as f64;
    let frame = Frame {
        x_min: 1.0,
        x_max: max_x.max(2.0),
        y_min: 0.0,
        y_max: 1.0,
    };
    let mut svg = Svg::new();
    svg.axes(&frame, "pair index", "displayed value");
    let ability: Vec<(f64, f64)> = rows
        .iter()
        .map(|r| (frame.x(r.pair_index as f64), frame.y(r.display_theta)))
        .collect();
    svg.polyline(&ability, "seagreen");
    let difficulty: Vec<(f64, f64)> = rows
        .iter()
        .filter_map(|r| {
            r.display_d
                .map(|d| (frame.x(r.pair_index as f64), frame.y(d)))
        })
        .collect();
    if difficulty.len() >= 2 {
        svg.polyline(&difficulty, "indianred");
    }
    for r in rows {
        let color = if r.label { "seagreen" } else { "indianred" };
        svg.circle(
            frame.x(r.pair_index as f64),
            frame.y(r.display_theta),
            3.5,
            color,
        );
    }
    svg.text(MARGIN + 8.0, MARGIN - 8.0, 13, dialogue_id);
    svg.text(
        MARGIN + 8.0,
        MARGIN + 10.0,
        11,
        "ability (green), task difficulty (red)",
    );
    svg.finish()
}
