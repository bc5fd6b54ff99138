#include "gesture_forge/depth_encoder.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <tuple>

#include "gesture_forge/error.hpp"

namespace gesture_forge {

DepthMask::DepthMask(int width, int height) : width_(width), height_(height) {
    require(width >= 1 && height >= 1, ErrorKind::InvalidArgument, "mask dimensions must be positive");
    cells_.assign(static_cast<std::size_t>(width) * height, 0);
}

DepthMask DepthMask::upscaled(int factor) const {
    require(factor >= 1, ErrorKind::InvalidArgument, "upscale factor must be >= 1");
    DepthMask out(width_ * factor, height_ * factor);
    for (int y = 0; y < out.height(); ++y)
        for (int x = 0; x < out.width(); ++x) out.set_depth(x, y, depth(x / factor, y / factor));
    return out;
}

namespace {

constexpr double kFar = 1e20;

// Lower envelope of parabolas (Felzenszwalb & Huttenlocher), exact for
// integer sample positions.
void distance_1d(const std::vector<double>& f, std::vector<double>& d, std::vector<int>& v,
                 std::vector<double>& z) {
    const int n = static_cast<int>(f.size());
    int k = 0;
    v[0] = 0;
    z[0] = -std::numeric_limits<double>::infinity();
    z[1] = std::numeric_limits<double>::infinity();
    auto intersect = [&](int q, int p) {
        return ((f[q] + double(q) * q) - (f[p] + double(p) * p)) / (2.0 * q - 2.0 * p);
    };
    for (int q = 1; q < n; ++q) {
        double s = intersect(q, v[k]);
        while (s <= z[k]) s = intersect(q, v[--k]);  // z[0] = -inf bounds the loop
        ++k;
        v[k] = q;
        z[k] = s;
        z[k + 1] = std::numeric_limits<double>::infinity();
    }
    k = 0;
    for (int q = 0; q < n; ++q) {
        while (z[k + 1] < q) ++k;
        const double dq = q - v[k];
        d[q] = dq * dq + f[v[k]];
    }
}

}  // namespace

std::vector<double> squared_distance_to_background(const DepthMask& mask) {
    // One-cell background border makes the image edge count as background.
    const int w = mask.width() + 2;
    const int h = mask.height() + 2;
    std::vector<double> grid(static_cast<std::size_t>(w) * h, 0.0);
    for (int y = 0; y < mask.height(); ++y)
        for (int x = 0; x < mask.width(); ++x)
            if (mask.foreground(x, y)) grid[static_cast<std::size_t>(y + 1) * w + x + 1] = kFar;

    const int n = std::max(w, h);
    std::vector<double> f, d;
    std::vector<int> v(n);
    std::vector<double> z(n + 1);
    for (int x = 0; x < w; ++x) {
        f.resize(h);
        d.resize(h);
        for (int y = 0; y < h; ++y) f[y] = grid[static_cast<std::size_t>(y) * w + x];
        distance_1d(f, d, v, z);
        for (int y = 0; y < h; ++y) grid[static_cast<std::size_t>(y) * w + x] = d[y];
    }
    for (int y = 0; y < h; ++y) {
        f.assign(grid.begin() + static_cast<std::ptrdiff_t>(y) * w, grid.begin() + static_cast<std::ptrdiff_t>(y + 1) * w);
        d.resize(w);
        distance_1d(f, d, v, z);
        std::copy(d.begin(), d.end(), grid.begin() + static_cast<std::ptrdiff_t>(y) * w);
    }

    std::vector<double> out(static_cast<std::size_t>(mask.width()) * mask.height());
    for (int y = 0; y < mask.height(); ++y)
        for (int x = 0; x < mask.width(); ++x)
            out[mask.index(x, y)] = grid[static_cast<std::size_t>(y + 1) * w + x + 1];
    return out;
}

Vec2 gravity_center(const DepthMask& mask) {
    const std::vector<double> dist = squared_distance_to_background(mask);
    double best = -1.0;
    Vec2 center = Vec2::Zero();
    for (int y = 0; y < mask.height(); ++y) {
        for (int x = 0; x < mask.width(); ++x) {
            if (!mask.foreground(x, y)) continue;
            const double d = dist[mask.index(x, y)];
            if (d > best) {
                best = d;
                center = Vec2(x, y);
            }
        }
    }
    require(best >= 0.0, ErrorKind::EmptyMask, "mask has no foreground pixel");
    return center;
}

Baseline baseline_from(const Vec2& center, const Vec2& elbow) {
    const double length = (center - elbow).norm();
    require(length > 0.0, ErrorKind::ZeroBaseline, "palm centre coincides with the elbow");
    return Baseline{center, length};
}

double keypoint_confidence(double d_euc, const Baseline& baseline) {
    require(d_euc >= 0.0, ErrorKind::InvalidArgument, "distance must be non-negative");
    require(baseline.length > 0.0, ErrorKind::ZeroBaseline, "baseline length must be positive");
    return std::clamp(1.0 - d_euc / (4.0 * baseline.length), 0.0, 1.0);
}

std::vector<ProspectRegion> segment_prospects(const DepthMask& mask, double depth_threshold) {
    std::vector<ProspectRegion> regions;
    std::vector<char> seen(mask.cells().size(), 0);
    auto inside = [&](int x, int y) {
        const auto d = mask.depth(x, y);
        return d != 0 && d <= depth_threshold;
    };
    std::vector<Eigen::Vector2i> stack;
    for (int y = 0; y < mask.height(); ++y) {
        for (int x = 0; x < mask.width(); ++x) {
            if (seen[mask.index(x, y)] || !inside(x, y)) continue;
            ProspectRegion region;
            stack.assign(1, {x, y});
            seen[mask.index(x, y)] = 1;
            while (!stack.empty()) {
                const Eigen::Vector2i p = stack.back();
                stack.pop_back();
                region.cells.push_back(p);
                constexpr int dx[] = {1, -1, 0, 0};
                constexpr int dy[] = {0, 0, 1, -1};
                for (int k = 0; k < 4; ++k) {
                    const int nx = p.x() + dx[k];
                    const int ny = p.y() + dy[k];
                    if (!mask.contains(nx, ny) || seen[mask.index(nx, ny)] || !inside(nx, ny)) continue;
                    seen[mask.index(nx, ny)] = 1;
                    stack.push_back({nx, ny});
                }
            }
            Vec2 sum = Vec2::Zero();
            for (const auto& c : region.cells) sum += c.cast<double>();
            region.centroid = sum / static_cast<double>(region.cells.size());
            regions.push_back(std::move(region));
        }
    }
    return regions;
}

SkeletonPose skeleton_from_pose(const KeypointPositions& pose, const Vec3& palm_center,
                                const Baseline& baseline) {
    SkeletonPose out;
    for (int k = 0; k < kKeypointCount; ++k) {
        const Vec3 rel = pose[k] - palm_center;
        out[k] = baseline.center + baseline.length * Vec2(rel.x(), -rel.y());
    }
    return out;
}

HandFrame encode_frame(std::vector<ProspectRegion> regions, const Baseline& baseline,
                       const SkeletonPose& skeleton, const DepthMask* depth, long timestamp) {
    require(baseline.length > 0.0, ErrorKind::ZeroBaseline, "baseline length must be positive");

    // Greedy matching over all (region, keypoint) pairs by ascending distance.
    std::vector<std::tuple<double, int, int>> pairs;
    pairs.reserve(regions.size() * kKeypointCount);
    for (int r = 0; r < static_cast<int>(regions.size()); ++r)
        for (int k = 0; k < kKeypointCount; ++k)
            pairs.emplace_back((regions[r].centroid - skeleton[k]).norm(), r, k);
    std::sort(pairs.begin(), pairs.end());
    std::vector<int> region_of(kKeypointCount, -1);
    std::vector<char> region_used(regions.size(), 0);
    for (const auto& [dist, r, k] : pairs) {
        if (region_used[r] || region_of[k] >= 0) continue;
        region_used[r] = 1;
        region_of[k] = r;
        regions[r].class_hint = KeypointId::from_flat(k);
    }

    auto depth_at = [&](const Vec2& p) -> double {
        if (!depth) return 0.0;
        const int x = static_cast<int>(std::lround(p.x()));
        const int y = static_cast<int>(std::lround(p.y()));
        return depth->contains(x, y) ? depth->depth(x, y) : 0.0;
    };
    const double center_depth = depth_at(baseline.center);

    KeypointPositions positions;
    KeypointConfidence confidence{};
    for (int k = 0; k < kKeypointCount; ++k) {
        const int r = region_of[k];
        const Vec2 p = r >= 0 ? regions[r].centroid : skeleton[k];
        double z = 0.0;
        if (r >= 0) {
            const double d = depth_at(p);
            if (d > 0.0 && center_depth > 0.0) z = (d - center_depth) / baseline.length;
        }
        positions[k] = Vec3((p.x() - baseline.center.x()) / baseline.length,
                            -(p.y() - baseline.center.y()) / baseline.length, z);

        if (r >= 0) {
            confidence[k] = keypoint_confidence(0.0, baseline);
            continue;
        }
        // Unmatched: distance to the nearest cell of a region claimed by the same class.
        const KeypointClass cls = KeypointId::from_flat(k).cls;
        double best = std::numeric_limits<double>::infinity();
        for (int j = 0; j < kKeypointCount; ++j) {
            if (region_of[j] < 0 || KeypointId::from_flat(j).cls != cls) continue;
            for (const auto& cell : regions[region_of[j]].cells)
                best = std::min(best, (cell.cast<double>() - skeleton[k]).norm());
        }
        confidence[k] = std::isfinite(best) ? keypoint_confidence(best, baseline) : 0.0;
    }

    return hand_frame_from_positions(positions, CoordinateFrame{}, 1.0, confidence, timestamp);
}

namespace {

double segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
    const Vec2 ab = b - a;
    const double len2 = ab.squaredNorm();
    const double t = len2 > 0.0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
    return (p - (a + t * ab)).norm();
}

}  // namespace

RenderedHand render_hand(const KeypointPositions& pose, const Vec3& palm_center,
                         const HandRenderOptions& opt) {
    double min_x = palm_center.x() - opt.palm_radius, max_x = palm_center.x() + opt.palm_radius;
    double min_y = palm_center.y() - opt.palm_radius, max_y = palm_center.y() + opt.palm_radius;
    for (const Vec3& p : pose) {
        min_x = std::min(min_x, p.x() - opt.forearm_halfwidth);
        max_x = std::max(max_x, p.x() + opt.forearm_halfwidth);
        min_y = std::min(min_y, p.y() - opt.forearm_halfwidth);
        max_y = std::max(max_y, p.y() + opt.forearm_halfwidth);
    }
    const int width = static_cast<int>(std::ceil((max_x - min_x) * opt.scale)) + 2 * opt.margin;
    const int height = static_cast<int>(std::ceil((max_y - min_y) * opt.scale)) + 2 * opt.margin;

    // Continuous image coordinates, y pointing down.
    auto to_px = [&](const Vec3& p) {
        return Vec2((p.x() - min_x) * opt.scale + opt.margin, (max_y - p.y()) * opt.scale + opt.margin);
    };
    std::array<Vec2, kKeypointCount> kp;
    for (int k = 0; k < kKeypointCount; ++k) kp[k] = to_px(pose[k]);
    const Vec2 palm = to_px(palm_center);

    std::vector<std::tuple<Vec2, Vec2, double>> bones;
    bones.emplace_back(kp[kElbow.flat()], palm, opt.forearm_halfwidth * opt.scale);
    for (int c = 0; c < 5; ++c) {
        const auto cls = static_cast<KeypointClass>(c);
        const int n = class_size(cls);
        for (int i = 0; i + 1 < n; ++i)
            bones.emplace_back(kp[KeypointId{cls, i}.flat()], kp[KeypointId{cls, i + 1}.flat()],
                               opt.bone_halfwidth * opt.scale);
        bones.emplace_back(kp[KeypointId{cls, n - 1}.flat()], palm, opt.bone_halfwidth * opt.scale);
    }

    RenderedHand out;
    out.mask = DepthMask(width, height);
    const double palm_r = opt.palm_radius * opt.scale;
    const double key_r = opt.keypoint_radius * opt.scale;
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            const Vec2 p(x + 0.5, y + 0.5);
            bool near = false;
            for (const Vec2& k : kp) near = near || (p - k).norm() <= key_r;
            if (near) {
                out.mask.set_depth(x, y, opt.near_depth);
                continue;
            }
            bool far = (p - palm).norm() <= palm_r;
            for (const auto& [a, b, hw] : bones) far = far || segment_distance(p, a, b) <= hw;
            if (far) out.mask.set_depth(x, y, opt.far_depth);
        }
    }
    // Report positions in the pixel-index convention used by centroids.
    for (int k = 0; k < kKeypointCount; ++k) out.keypoints_px[k] = kp[k] - Vec2(0.5, 0.5);
    out.palm_center_px = palm - Vec2(0.5, 0.5);
    return out;
}

void occlude_rect(DepthMask& mask, int x0, int y0, int x1, int y1) {
    for (int y = std::max(0, y0); y < std::min(mask.height(), y1); ++y)
        for (int x = std::max(0, x0); x < std::min(mask.width(), x1); ++x) mask.set_depth(x, y, 0);
}

namespace {

// Next whitespace-separated header token, skipping '#' comments.
std::string next_token(const std::string& bytes, std::size_t& pos) {
    while (pos < bytes.size()) {
        const char c = bytes[pos];
        if (c == '#') {
            while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
        } else if (std::isspace(static_cast<unsigned char>(c))) {
            ++pos;
        } else {
            break;
        }
    }
    const std::size_t start = pos;
    while (pos < bytes.size() && !std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
    require(pos > start, ErrorKind::ParseError, "truncated PGM header");
    return bytes.substr(start, pos - start);
}

int parse_int(const std::string& tok) {
    try {
        std::size_t used = 0;
        const int v = std::stoi(tok, &used);
        if (used == tok.size()) return v;
    } catch (const std::exception&) {
    }
    throw Error(ErrorKind::ParseError, "not an integer in PGM: '" + tok + "'");
}

}  // namespace

DepthMask parse_pgm(const std::string& bytes) {
    std::size_t pos = 0;
    const std::string magic = next_token(bytes, pos);
    require(magic == "P2" || magic == "P5", ErrorKind::ParseError, "unsupported PGM magic '" + magic + "'");
    const int width = parse_int(next_token(bytes, pos));
    const int height = parse_int(next_token(bytes, pos));
    const int maxval = parse_int(next_token(bytes, pos));
    require(width >= 1 && height >= 1 && maxval >= 1 && maxval <= 65535, ErrorKind::ParseError,
            "invalid PGM dimensions or maxval");
    DepthMask mask(width, height);
    if (magic == "P2") {
        for (int y = 0; y < height; ++y)
            for (int x = 0; x < width; ++x) {
                const int v = parse_int(next_token(bytes, pos));
                require(v >= 0 && v <= maxval, ErrorKind::ParseError, "PGM sample out of range");
                mask.set_depth(x, y, static_cast<std::uint16_t>(v));
            }
        return mask;
    }
    ++pos;  // single whitespace after maxval
    const int bpp = maxval < 256 ? 1 : 2;
    require(bytes.size() >= pos + static_cast<std::size_t>(width) * height * bpp, ErrorKind::ParseError,
            "truncated PGM raster");
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) {
            const auto* p = reinterpret_cast<const unsigned char*>(bytes.data() + pos);
            const int v = bpp == 1 ? p[0] : (p[0] << 8) | p[1];
            pos += bpp;
            mask.set_depth(x, y, static_cast<std::uint16_t>(v));
        }
    return mask;
}

DepthMask read_pgm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    require(static_cast<bool>(in), ErrorKind::IoError, "cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_pgm(buf.str());
}

std::string format_pgm(const DepthMask& mask, bool ascii) {
    int maxval = 1;
    for (auto v : mask.cells()) maxval = std::max<int>(maxval, v);
    maxval = maxval < 256 ? 255 : 65535;
    std::ostringstream out;
    out << (ascii ? "P2" : "P5") << '\n' << mask.width() << ' ' << mask.height() << '\n' << maxval << '\n';
    for (int y = 0; y < mask.height(); ++y) {
        for (int x = 0; x < mask.width(); ++x) {
            const int v = mask.depth(x, y);
            if (ascii) {
                out << v << (x + 1 == mask.width() ? '\n' : ' ');
            } else if (maxval == 255) {
                out.put(static_cast<char>(v));
            } else {
                out.put(static_cast<char>(v >> 8));
                out.put(static_cast<char>(v & 0xff));
            }
        }
    }
    return out.str();
}

void write_pgm(const std::string& path, const DepthMask& mask, bool ascii) {
    std::ofstream out(path, std::ios::binary);
    require(static_cast<bool>(out), ErrorKind::IoError, "cannot write " + path);
    out << format_pgm(mask, ascii);
}

}  // namespace gesture_forge
