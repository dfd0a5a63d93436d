#include "expray/render.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <thread>

namespace expray {

namespace {

constexpr double kExpOverflow = 709.782712893384;

// Escape count of the orbit of z0 under z -> exp(z + kappa); -1 if it survives.
int32_t escape_count(double kre, double kim, double zre, double zim, int max_iter,
                     double escape_re) {
    for (int n = 0; n < max_iter; ++n) {
        if (zre > escape_re) return n;
        const double wre = zre + kre;
        if (wre > kExpOverflow) return n + 1;  // next point is at +infinity
        const double wim = zim + kim;
        const double mag = std::exp(wre);
        zre = mag * std::cos(wim);
        zim = mag * std::sin(wim);
    }
    return -1;
}

template <class PixelFn>
EscapeField compute_field(const ImageSpec& spec, PixelFn&& fn) {
    EscapeField field;
    field.width = spec.width_px;
    field.height = spec.height_px;
    field.iters.assign(static_cast<size_t>(spec.width_px) * spec.height_px, -1);

    const unsigned workers = std::max(1u, std::thread::hardware_concurrency());
    auto run_rows = [&](int y0, int y1) {
        for (int iy = y0; iy < y1; ++iy)
            for (int ix = 0; ix < spec.width_px; ++ix)
                field.iters[static_cast<size_t>(iy) * spec.width_px + ix] = fn(ix, iy);
    };
    if (workers == 1 || spec.height_px < 32) {
        run_rows(0, spec.height_px);
        return field;
    }
    std::vector<std::thread> pool;
    const int chunk = (spec.height_px + static_cast<int>(workers) - 1) / static_cast<int>(workers);
    for (int y = 0; y < spec.height_px; y += chunk)
        pool.emplace_back(run_rows, y, std::min(y + chunk, spec.height_px));
    for (auto& th : pool) th.join();
    return field;
}

}  // namespace

Complex ImageSpec::pixel_center(int ix, int iy) const {
    const double upp = units_per_px();
    return {center.real() + (ix + 0.5 - width_px / 2.0) * upp,
            center.imag() + (height_px / 2.0 - iy - 0.5) * upp};
}

std::pair<double, double> ImageSpec::to_pixel(const Complex& z) const {
    const double upp = units_per_px();
    return {(z.real() - center.real()) / upp + width_px / 2.0 - 0.5,
            height_px / 2.0 - 0.5 - (z.imag() - center.imag()) / upp};
}

EscapeField escape_field_parameter(const ImageSpec& spec) {
    return compute_field(spec, [&](int ix, int iy) {
        const Complex kappa = spec.pixel_center(ix, iy);
        return escape_count(kappa.real(), kappa.imag(), 0.0, 0.0, spec.max_iter, spec.escape_re);
    });
}

EscapeField escape_field_dynamic(const Complex& kappa, const ImageSpec& spec) {
    return compute_field(spec, [&](int ix, int iy) {
        const Complex z0 = spec.pixel_center(ix, iy);
        return escape_count(kappa.real(), kappa.imag(), z0.real(), z0.imag(), spec.max_iter,
                            spec.escape_re);
    });
}

Image field_to_image(const EscapeField& field, int max_iter) {
    Image img;
    img.width = field.width;
    img.height = field.height;
    img.gray.resize(field.iters.size());
    for (size_t i = 0; i < field.iters.size(); ++i) {
        const int32_t n = field.iters[i];
        if (n < 0) {
            img.gray[i] = 255;
        } else {
            const long v = 255L * n / std::max(1, max_iter);
            img.gray[i] = static_cast<uint8_t>(std::clamp(v, 0L, 254L));
        }
    }
    return img;
}

namespace {

// Liang-Barsky clip of a segment to the pixel rectangle.
bool clip_segment(double& x0, double& y0, double& x1, double& y1, double xmax, double ymax) {
    double t0 = 0.0, t1 = 1.0;
    const double dx = x1 - x0, dy = y1 - y0;
    const double p[4] = {-dx, dx, -dy, dy};
    const double q[4] = {x0 + 0.5, xmax - x0, y0 + 0.5, ymax - y0};
    for (int i = 0; i < 4; ++i) {
        if (p[i] == 0.0) {
            if (q[i] < 0.0) return false;
            continue;
        }
        const double r = q[i] / p[i];
        if (p[i] < 0.0)
            t0 = std::max(t0, r);
        else
            t1 = std::min(t1, r);
    }
    if (t0 > t1) return false;
    const double nx0 = x0 + t0 * dx, ny0 = y0 + t0 * dy;
    const double nx1 = x0 + t1 * dx, ny1 = y0 + t1 * dy;
    x0 = nx0;
    y0 = ny0;
    x1 = nx1;
    y1 = ny1;
    return true;
}

void bresenham(std::vector<std::pair<int, int>>& out, int x0, int y0, int x1, int y1, int w,
               int h) {
    const int dx = std::abs(x1 - x0), sx = x0 < x1 ? 1 : -1;
    const int dy = -std::abs(y1 - y0), sy = y0 < y1 ? 1 : -1;
    int err = dx + dy;
    for (;;) {
        if (x0 >= 0 && x0 < w && y0 >= 0 && y0 < h) out.emplace_back(x0, y0);
        if (x0 == x1 && y0 == y1) break;
        const int e2 = 2 * err;
        if (e2 >= dy) {
            err += dy;
            x0 += sx;
        }
        if (e2 <= dx) {
            err += dx;
            y0 += sy;
        }
    }
}

}  // namespace

std::vector<std::pair<int, int>> rasterize_polyline(const ImageSpec& spec,
                                                    const std::vector<Complex>& points) {
    std::vector<std::pair<int, int>> px;
    for (size_t i = 0; i + 1 < points.size(); ++i) {
        auto [x0, y0] = spec.to_pixel(points[i]);
        auto [x1, y1] = spec.to_pixel(points[i + 1]);
        if (!clip_segment(x0, y0, x1, y1, spec.width_px - 0.5, spec.height_px - 0.5)) continue;
        bresenham(px, static_cast<int>(std::lround(x0)), static_cast<int>(std::lround(y0)),
                  static_cast<int>(std::lround(x1)), static_cast<int>(std::lround(y1)),
                  spec.width_px, spec.height_px);
    }
    std::sort(px.begin(), px.end());
    px.erase(std::unique(px.begin(), px.end()), px.end());
    return px;
}

void draw_polyline(Image& img, const ImageSpec& spec, const std::vector<Complex>& points,
                   uint8_t value) {
    for (auto [x, y] : rasterize_polyline(spec, points))
        img.gray[static_cast<size_t>(y) * img.width + x] = value;
}

Image render_parameter_plane(const ImageSpec& spec, const std::vector<ParamTrace>& overlays) {
    Image img = field_to_image(escape_field_parameter(spec), spec.max_iter);
    for (const ParamTrace& trace : overlays) {
        std::vector<Complex> pts;
        pts.reserve(trace.samples.size());
        for (const auto& smp : trace.samples) pts.push_back(smp.kappa);
        draw_polyline(img, spec, pts);
    }
    return img;
}

Image render_dynamic_plane(const Complex& kappa, const ImageSpec& spec,
                           const std::vector<RayTrace>& overlays) {
    Image img = field_to_image(escape_field_dynamic(kappa, spec), spec.max_iter);
    for (const RayTrace& trace : overlays) {
        std::vector<Complex> pts;
        pts.reserve(trace.samples.size());
        for (const auto& smp : trace.samples) pts.push_back(smp.z);
        draw_polyline(img, spec, pts);
    }
    return img;
}

std::string ppm_bytes(const Image& img) {
    std::string out = "P6\n" + std::to_string(img.width) + " " + std::to_string(img.height) +
                      "\n255\n";
    out.reserve(out.size() + img.gray.size() * 3);
    for (uint8_t g : img.gray) {
        out.push_back(static_cast<char>(g));
        out.push_back(static_cast<char>(g));
        out.push_back(static_cast<char>(g));
    }
    return out;
}

void write_ppm(const Image& img, const std::string& path) {
    const std::string bytes = ppm_bytes(img);
    std::ofstream out(path, std::ios::binary);
    if (!out) raise(Errc::DomainError, "cannot open '" + path + "' for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace expray
