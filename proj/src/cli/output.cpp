#include "vpchain/cli/output.hpp"

#include <charconv>
#include <cmath>
#include <json.hpp>
#include <sstream>

namespace vpchain::cli {

CsvWriter::CsvWriter(const std::filesystem::path& path, std::string_view command, const ExperimentConfig& config,
                     const std::vector<std::string>& columns)
    : path_(path), out_(path, std::ios::binary), width_(columns.size()) {
  if (!out_) throw std::runtime_error("cannot write " + path.string());
  out_ << "# vpchain " << command << "\n";
  out_ << "# seed = " << config.require_seed() << "\n";
  for (const auto& [key, value] : config.entries()) out_ << "# " << key << " = " << value << "\n";
  row(columns);
}

void CsvWriter::row(const std::vector<std::string>& cells) {
  if (cells.size() != width_) throw std::logic_error("CsvWriter: row width mismatch in " + path_.string());
  for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
  out_ << "\n";
}

std::string cell(double x) { return format_double(x); }
std::string cell(std::uint64_t x) { return std::to_string(x); }
std::string cell(std::int64_t x) { return std::to_string(x); }

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

std::string trajectory_jsonl(const std::vector<TrajectoryStep>& steps) {
  using json = nlohmann::ordered_json;
  auto point = [](const Point& p) {
    json a = json::array();
    for (double v : p.coords()) a.push_back(v);
    return a;
  };
  std::string out;
  for (const auto& s : steps) {
    json rec;
    rec["step"] = s.state.step;
    rec["u"] = s.u ? point(*s.u) : json(nullptr);
    json balls = json::array();
    for (const auto& b : s.state.body.balls()) balls.push_back(json{{"center", point(b.center)}, {"radius", b.radius}});
    rec["balls"] = std::move(balls);
    const auto& box = s.state.body.box();
    rec["box"] = box ? json{{"center", point(box->center)}, {"half_width", box->half_width}} : json(nullptr);
    rec["regen"] = s.state.last_regen_step == s.state.step;
    out += rec.dump();
    out += "\n";
  }
  return out;
}

namespace {

constexpr double kPanel = 200.0;  // panel side in px
constexpr double kTitle = 22.0;
constexpr double kGap = 10.0;
constexpr double kScale = 80.0;   // px per unit; the panel shows [-1.25, 1.25]^2
constexpr int kColumns = 5;

std::string fx(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, 3);
  std::string s(buf, ptr);
  if (s == "-0.000") s = "0.000";
  return s;
}

struct Frame {
  double cx;
  double cy;
  double x(double u) const { return cx + kScale * u; }
  double y(double v) const { return cy - kScale * v; }
};

// The outline of a norm ball as an SVG element; `attrs` is appended inside.
std::string shape(NormKind kind, const Frame& f, const Point& c, double r, const std::string& attrs) {
  std::ostringstream s;
  const double x = f.x(c[0]);
  const double y = f.y(c[1]);
  const double pr = kScale * r;
  switch (kind) {
    case NormKind::L2:
      s << "<circle cx=\"" << fx(x) << "\" cy=\"" << fx(y) << "\" r=\"" << fx(pr) << "\"" << attrs << "/>";
      break;
    case NormKind::Linf:
      s << "<rect x=\"" << fx(x - pr) << "\" y=\"" << fx(y - pr) << "\" width=\"" << fx(2 * pr) << "\" height=\""
        << fx(2 * pr) << "\"" << attrs << "/>";
      break;
    case NormKind::L1:
      s << "<polygon points=\"" << fx(x) << "," << fx(y - pr) << " " << fx(x + pr) << "," << fx(y) << " " << fx(x)
        << "," << fx(y + pr) << " " << fx(x - pr) << "," << fx(y) << "\"" << attrs << "/>";
      break;
  }
  return s.str();
}

std::string box_shape(const Frame& f, const Box& b, const std::string& attrs) {
  // A cube is the Linf ball of radius half_width.
  return shape(NormKind::Linf, f, b.center, b.half_width, attrs);
}

}  // namespace

std::string trajectory_svg(const std::vector<TrajectoryStep>& steps) {
  if (steps.empty()) throw UsageError("chain-run.steps: must be >= 1 to render");
  const auto& space = steps.front().state.body.space();
  if (space.dim() != 2) throw UsageError("space.dim: SVG output needs d = 2");
  const NormKind kind = space.kind();
  const int n = static_cast<int>(steps.size());
  const int cols = std::min(kColumns, n);
  const int rows = (n + cols - 1) / cols;
  const double width = cols * kPanel + (cols + 1) * kGap;
  const double height = rows * (kPanel + kTitle) + (rows + 1) * kGap;

  std::ostringstream defs, body;
  for (int h = 0; h < n; ++h) {
    const auto& st = steps[static_cast<std::size_t>(h)].state;
    const double px = kGap + (h % cols) * (kPanel + kGap);
    const double py = kGap + (h / cols) * (kPanel + kTitle + kGap);
    const Frame f{px + kPanel / 2, py + kTitle + kPanel / 2};
    const bool regen = st.last_regen_step == st.step;
    const std::string id = "s" + std::to_string(h);

    defs << "<clipPath id=\"" << id << "p\"><rect x=\"" << fx(px) << "\" y=\"" << fx(py + kTitle) << "\" width=\""
         << fx(kPanel) << "\" height=\"" << fx(kPanel) << "\"/></clipPath>\n";
    const auto& balls = st.body.balls();
    for (std::size_t i = 0; i < balls.size(); ++i)
      defs << "<clipPath id=\"" << id << "b" << i << "\">" << shape(kind, f, balls[i].center, balls[i].radius, "")
           << "</clipPath>\n";
    if (st.body.box()) defs << "<clipPath id=\"" << id << "k\">" << box_shape(f, *st.body.box(), "") << "</clipPath>\n";

    body << "<g id=\"" << id << "\">\n";
    body << "<text x=\"" << fx(px + 4) << "\" y=\"" << fx(py + 15) << "\">h = " << st.step
         << (regen ? " (B1)" : "") << "</text>\n";
    body << "<rect x=\"" << fx(px) << "\" y=\"" << fx(py + kTitle) << "\" width=\"" << fx(kPanel) << "\" height=\""
         << fx(kPanel) << "\" fill=\"#ffffff\" stroke=\"" << (regen ? "#d62728" : "#999999")
         << "\" stroke-width=\"" << (regen ? "3" : "1") << "\"/>\n";
    body << "<g clip-path=\"url(#" << id << "p)\">\n";
    // The filled region: one nested group per constraint.
    std::size_t depth = 0;
    for (std::size_t i = 0; i < balls.size(); ++i, ++depth)
      body << "<g clip-path=\"url(#" << id << "b" << i << ")\">";
    if (st.body.box()) {
      body << "<g clip-path=\"url(#" << id << "k)\">";
      ++depth;
    }
    body << "<rect x=\"" << fx(px) << "\" y=\"" << fx(py + kTitle) << "\" width=\"" << fx(kPanel) << "\" height=\""
         << fx(kPanel) << "\" fill=\"#9ecae1\"/>";
    for (std::size_t i = 0; i < depth; ++i) body << "</g>";
    body << "\n";
    for (const auto& b : balls)
      body << shape(kind, f, b.center, b.radius, " fill=\"none\" stroke=\"#555555\" stroke-width=\"0.8\"") << "\n";
    if (st.body.box())
      body << box_shape(f, *st.body.box(), " fill=\"none\" stroke=\"#555555\" stroke-dasharray=\"4 2\"") << "\n";
    // Origin and, when known, the point drawn from this state.
    body << "<circle cx=\"" << fx(f.x(0)) << "\" cy=\"" << fx(f.y(0)) << "\" r=\"1.5\" fill=\"#000000\"/>\n";
    if (h + 1 < n && steps[static_cast<std::size_t>(h + 1)].u) {
      const auto& u = *steps[static_cast<std::size_t>(h + 1)].u;
      body << "<circle cx=\"" << fx(f.x(u[0])) << "\" cy=\"" << fx(f.y(u[1]))
           << "\" r=\"2.5\" fill=\"#d62728\"/>\n";
    }
    body << "</g>\n</g>\n";
  }

  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fx(width) << "\" height=\"" << fx(height)
      << "\" viewBox=\"0 0 " << fx(width) << " " << fx(height)
      << "\" font-family=\"sans-serif\" font-size=\"13\">\n"
      << "<defs>\n"
      << defs.str() << "</defs>\n"
      << body.str() << "</svg>\n";
  return svg.str();
}

}  // namespace vpchain::cli
