#include "geomprobe/svg.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "geomprobe/errors.hpp"
#include "geomprobe/format.hpp"
#include "geomprobe/geometry.hpp"

namespace geomprobe {

namespace {

struct Extent {
  double min_x = 0, min_y = 0, max_x = 0, max_y = 0;
  bool any = false;

  void include(double x, double y) {
    if (!any) {
      min_x = max_x = x;
      min_y = max_y = y;
      any = true;
      return;
    }
    min_x = std::min(min_x, x);
    max_x = std::max(max_x, x);
    min_y = std::min(min_y, y);
    max_y = std::max(max_y, y);
  }
};

struct Layer {
  std::string id;
  std::string stroke;
  std::vector<std::string> elements;
};

std::string num(double v) { return format_fixed(v, 3); }

std::string circle_el(double cx, double cy, double r, const std::string& title) {
  return "<circle cx=\"" + num(cx) + "\" cy=\"" + num(cy) + "\" r=\"" + num(r) + "\"><title>" +
         title + "</title></circle>";
}

std::string line_el(double x1, double y1, double x2, double y2, const std::string& stroke) {
  return "<line x1=\"" + num(x1) + "\" y1=\"" + num(y1) + "\" x2=\"" + num(x2) + "\" y2=\"" +
         num(y2) + "\" stroke=\"" + stroke + "\"/>";
}

std::optional<Measurement> feature_length(const Feature& f) {
  if (f.aerial) return f.aerial;
  if (f.ground) return f.ground;
  return std::nullopt;
}

}  // namespace

SvgResult render_overlay(const SurveySite& site, const std::vector<std::string>& draws) {
  SvgResult result;
  std::vector<Layer> layers;
  Extent extent;

  for (const std::string& draw : draws) {
    std::string family = draw;
    std::string args;
    if (size_t colon = draw.find(':'); colon != std::string::npos) {
      family = draw.substr(0, colon);
      args = draw.substr(colon + 1);
    }

    if (family == "kiva-circles") {
      Layer layer{"kiva-circles", "#e06fa0", {}};
      for (const Feature& f : site.features()) {
        if (f.kind != FeatureKind::circle) continue;
        std::optional<Measurement> radius = feature_length(f);
        if (!radius) {
          result.warnings.push_back("kiva-circles: '" + f.id + "' has no radius measurement");
          continue;
        }
        if (!f.xy_cm) {
          result.warnings.push_back("kiva-circles: '" + f.id + "' has no coordinates");
          continue;
        }
        double cx = (*f.xy_cm)[0], cy = (*f.xy_cm)[1], r = radius->value;
        layer.elements.push_back(circle_el(cx, cy, r, f.id));
        extent.include(cx - r, cy - r);
        extent.include(cx + r, cy + r);
      }
      layers.push_back(std::move(layer));
    } else if (family == "golden-rect") {
      const Feature* width = site.find_feature("outer_d_width");
      std::optional<Measurement> w = width ? feature_length(*width) : std::nullopt;
      if (!w) {
        result.warnings.push_back("golden-rect: no outer_d_width measurement in site");
        continue;
      }
      GoldenRectangle rect = construct_golden_rectangle(w->value, {0, 0, 0}, 0);
      std::string points;
      for (const Point2D& c : rect.corners) {
        if (!points.empty()) points += ' ';
        points += num(c.x) + ',' + num(c.y);
        extent.include(c.x, c.y);
      }
      layers.push_back({"golden-rect",
                        "#c03030",
                        {"<polygon points=\"" + points + "\"><title>golden rectangle " +
                         num(rect.length) + " x " + num(rect.width) + " cm</title></polygon>"}});
    } else if (family == "equilateral") {
      size_t comma = args.find(',');
      if (args.empty() || comma == std::string::npos || comma == 0 || comma + 1 == args.size()) {
        throw ValidationError("equilateral draw needs two feature ids: equilateral:ID1,ID2");
      }
      std::string ids[2] = {args.substr(0, comma), args.substr(comma + 1)};
      Point2D pts[2];
      bool ok = true;
      for (int i = 0; i < 2 && ok; ++i) {
        const Feature* f = site.find_feature(ids[i]);
        if (f == nullptr || !f->xy_cm) {
          result.warnings.push_back("equilateral: '" + ids[i] + "' " +
                                    (f == nullptr ? "not in site" : "has no coordinates"));
          ok = false;
          break;
        }
        pts[i] = {(*f->xy_cm)[0], (*f->xy_cm)[1], f->xy_sigma_cm.value_or(0.0)};
      }
      if (!ok) continue;
      Point2D apex = construct_equilateral(pts[0], pts[1]);
      std::string points = num(pts[0].x) + ',' + num(pts[0].y) + ' ' + num(pts[1].x) + ',' +
                           num(pts[1].y) + ' ' + num(apex.x) + ',' + num(apex.y);
      for (const Point2D& p : {pts[0], pts[1], apex}) extent.include(p.x, p.y);
      layers.push_back({"equilateral-" + ids[0] + '-' + ids[1],
                        "#2d8c3c",
                        {"<polygon points=\"" + points + "\"><title>equilateral on " + ids[0] +
                         ", " + ids[1] + "</title></polygon>"}});
    } else if (family == "square-circles") {
      if (args.empty()) {
        throw ValidationError("square-circles draw needs a feature id: square-circles:ID");
      }
      const Feature* f = site.find_feature(args);
      if (f == nullptr) {
        result.warnings.push_back("square-circles: '" + args + "' not in site");
        continue;
      }
      std::optional<Measurement> side = feature_length(*f);
      if (!side) {
        result.warnings.push_back("square-circles: '" + args + "' has no length measurement");
        continue;
      }
      if (!f->xy_cm) {
        result.warnings.push_back("square-circles: '" + args + "' has no coordinates");
        continue;
      }
      double cx = (*f->xy_cm)[0], cy = (*f->xy_cm)[1];
      double h = side->value / 2.0;
      SquareCircles circles = inscribed_circumscribed(side->value);
      std::string points = num(cx - h) + ',' + num(cy - h) + ' ' + num(cx + h) + ',' +
                           num(cy - h) + ' ' + num(cx + h) + ',' + num(cy + h) + ' ' +
                           num(cx - h) + ',' + num(cy + h);
      Layer layer{"square-circles-" + args, "#2855b0", {}};
      layer.elements.push_back("<polygon points=\"" + points + "\"><title>square on " + args +
                               "</title></polygon>");
      layer.elements.push_back(circle_el(cx, cy, circles.inscribed_radius, "inscribed circle"));
      layer.elements.push_back(
          circle_el(cx, cy, circles.circumscribed_radius, "circumscribed circle"));
      double r = circles.circumscribed_radius;
      extent.include(cx - r, cy - r);
      extent.include(cx + r, cy + r);
      layers.push_back(std::move(layer));
    } else if (family == "unit-lines") {
      const Feature* width = site.find_feature("outer_d_width");
      std::optional<Measurement> w = width ? feature_length(*width) : std::nullopt;
      if (!w) {
        result.warnings.push_back("unit-lines: no outer_d_width measurement in site");
        continue;
      }
      double W = w->value;
      struct Fraction {
        double value;
        const char* color;
      };
      const Fraction fractions[] = {
          {1.0, "#c03030"}, {0.5, "#d4a017"}, {1.0 / 3.0, "#1a2e6e"}, {0.375, "#7b4a12"}};
      Layer layer{"unit-lines", "none", {}};
      double dy = W / 10.0;
      for (size_t i = 0; i < std::size(fractions); ++i) {
        double y = -dy * static_cast<double>(i + 1);
        layer.elements.push_back(line_el(0, y, W * fractions[i].value, y, fractions[i].color));
        extent.include(0, y);
        extent.include(W * fractions[i].value, y);
      }
      layers.push_back(std::move(layer));
    } else {
      throw ValidationError("unknown draw family '" + family + "'");
    }
  }

  if (!extent.any) {
    extent.include(0, 0);
    extent.include(100, 100);
  }

  const double scale = 0.25;  // 1 px = 4 cm
  const double pad = 20.0;
  double width_px = (extent.max_x - extent.min_x) * scale + 2 * pad;
  double height_px = (extent.max_y - extent.min_y) * scale + 2 * pad;
  double tx = pad - extent.min_x * scale;
  double ty = pad + extent.max_y * scale;

  std::string doc;
  doc += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(width_px) + "\" height=\"" +
         num(height_px) + "\" viewBox=\"0 0 " + num(width_px) + ' ' + num(height_px) + "\">\n";
  doc += "<desc>site: " + site.name() +
         "; survey frame x east, y north (y up), units cm; drawn with transform scale(" +
         num(scale) + ",-" + num(scale) + "), so 1 px = " + num(1.0 / scale) +
         " cm and the page y axis points south</desc>\n";
  for (const std::string& warning : result.warnings) {
    doc += "<!-- warning: " + warning + " -->\n";
  }
  doc += "<g transform=\"translate(" + num(tx) + ',' + num(ty) + ") scale(" + num(scale) + ",-" +
         num(scale) + ")\" fill=\"none\" stroke-width=\"8\">\n";
  for (const Layer& layer : layers) {
    doc += "<g id=\"" + layer.id + "\"";
    if (layer.stroke != "none") doc += " stroke=\"" + layer.stroke + "\"";
    doc += ">\n";
    for (const std::string& el : layer.elements) doc += el + '\n';
    doc += "</g>\n";
  }
  doc += "</g>\n</svg>\n";
  result.document = std::move(doc);
  return result;
}

}  // namespace geomprobe
