#include "gibbsgeom/errors.hpp"
#include "gibbsgeom/numerics.hpp"
#include "gibbsgeom/rng.hpp"
#include "gibbsgeom/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <string>

namespace gibbsgeom {

namespace {

constexpr std::uint64_t kCellTag = 0x6c6c6563;   // cell streams
constexpr std::uint64_t kPointTag = 0x736f7000;  // plain reference sampling
constexpr std::uint64_t kChainTag = 0x6e686300;  // conditional chain
constexpr std::uint64_t kVoidTag = 0x64696f76;   // void replication seeds

enum : std::uint8_t { kUnknown = 0, kAccepted = 1, kRejected = 2 };

/// One space-time event of the free birth-death process, in window-relative
/// coordinates. Events alive at time zero have death > 0.
struct Event {
  Point pos;
  double birth = 0.0;
  double death = 0.0;
  double accept_u = 0.0;
  double growth_mark = 0.0;
  std::uint8_t status = kUnknown;
  bool ancestors_done = false;
  std::vector<std::uint32_t> anc;
};

struct Cell {
  Rng rng{0};
  double frontier = 0.0;  // history realized on [frontier, 0]
  std::vector<std::uint32_t> events;
};

double mark_draw(Rng& rng, MarkDist dist) {
  switch (dist) {
    case MarkDist::kNone: return 0.0;
    case MarkDist::kUniform01: return rng.uniform();
    case MarkDist::kExp1: return rng.exponential();
  }
  return 0.0;
}

/// The free process on (padded window) x (-infinity, 0], realized lazily.
/// Every cell keeps one RNG stream and a frontier; moving the frontier from G
/// down to F adds two independent Poisson pieces:
///   births in [F, G) that die before G, and
///   events born before F whose death lands in [F, G).
/// Together with the alive-at-zero piece drawn at cell creation this realizes
/// exactly the events with death above the frontier, which is everything a
/// query at a time above the frontier can see.
class BackwardProcess {
 public:
  BackwardProcess(const Potential& pot, double tau, double beta,
                  const Window& window, std::uint64_t seed,
                  const SamplerOptions& opt)
      : pot_(pot), tau_(tau), beta_(beta), opt_(opt), seed_(seed) {
    const int d = window.dim();
    rel_window_ = window;
    rel_window_.center = Point::zero(d);
    range_ = pot.range();

    // Cell sides: the interaction range when workable, widened so the cell
    // count over the window stays bounded.
    const double n_axis_cap = std::floor(std::pow(4.0e5, 1.0 / d));
    for (int a = 0; a < d; ++a) {
      double h = std::max(range_, window.side[a] / n_axis_cap);
      if (rel_window_.boundary == Boundary::kPeriodic) {
        n_cells_[a] = std::max<long>(
            1, static_cast<long>(std::floor(window.side[a] / h)));
        cell_side_[a] = window.side[a] / static_cast<double>(n_cells_[a]);
      } else {
        n_cells_[a] = 0;
        cell_side_[a] = h;
      }
    }
    cell_vol_ = 1.0;
    for (int a = 0; a < d; ++a) cell_vol_ *= cell_side_[a];

    if (opt_.max_padding >= 0.0) {
      max_padding_ = opt_.max_padding;
    } else {
      max_padding_ =
          64.0 * range_ + 10.0 * std::log(std::max(window.volume(), M_E));
    }
    padding_used_ = 0.0;
  }

  int dim() const { return rel_window_.dim(); }
  const Window& rel_window() const { return rel_window_; }
  double padding_used() const { return padding_used_; }
  std::size_t total_events() const { return events_.size(); }
  const Event& event(std::uint32_t id) const { return events_[id]; }

  /// Identifiers of alive-at-zero events inside the (relative) window,
  /// sorted by position. These are the emission candidates.
  std::vector<std::uint32_t> window_candidates() {
    const int d = dim();
    long lo[kMaxDim], hi[kMaxDim];
    for (int a = 0; a < d; ++a) {
      if (rel_window_.boundary == Boundary::kPeriodic) {
        lo[a] = 0;
        hi[a] = n_cells_[a] - 1;
      } else {
        lo[a] = coord_of(-0.5 * rel_window_.side[a], a);
        hi[a] = coord_of(0.5 * rel_window_.side[a], a);
      }
    }
    std::vector<std::uint32_t> out;
    CellCoord k;
    long idx[kMaxDim];
    for (int a = 0; a < d; ++a) idx[a] = lo[a];
    while (true) {
      for (int a = 0; a < d; ++a) k.c[a] = idx[a];
      Cell& cell = ensure_cell(k);
      for (std::uint32_t id : cell.events) {
        const Event& e = events_[id];
        if (e.death > 0.0 && rel_window_.contains(e.pos)) out.push_back(id);
      }
      int a = 0;
      for (; a < d; ++a) {
        if (++idx[a] <= hi[a]) break;
        idx[a] = lo[a];
      }
      if (a == d) break;
    }
    std::sort(out.begin(), out.end(), [this](std::uint32_t x, std::uint32_t y) {
      if (events_[x].pos.lex_less(events_[y].pos)) return true;
      if (events_[y].pos.lex_less(events_[x].pos)) return false;
      return x < y;
    });
    return out;
  }

  /// Resolve the thinning status of an event (and of everything its clan
  /// reaches), iteratively, oldest births first along dependency order.
  void resolve(std::uint32_t root) {
    if (beta_ == 0.0) {
      // Degenerate thinning: acceptance probability is identically one and
      // no ancestor can influence it, so the clan is empty by definition.
      events_[root].status = kAccepted;
      events_[root].ancestors_done = true;
      return;
    }
    std::vector<std::uint32_t> stack{root};
    std::size_t explored = 0;
    while (!stack.empty()) {
      const std::uint32_t id = stack.back();
      if (events_[id].status != kUnknown) {
        stack.pop_back();
        continue;
      }
      if (!events_[id].ancestors_done) {
        if (++explored > opt_.max_clan_points)
          throw ClanOverflow("clan exploration exceeded " +
                             std::to_string(opt_.max_clan_points) +
                             " events; parameters are too close to criticality");
        enumerate_ancestors(id);
      }
      Event& e = events_[id];
      bool blocked = false;
      for (std::uint32_t a : e.anc) {
        if (events_[a].status == kUnknown) {
          if (!blocked) stack.reserve(stack.size() + e.anc.size());
          stack.push_back(a);
          blocked = true;
        }
      }
      if (blocked) continue;
      std::vector<Point> accepted;
      for (std::uint32_t a : e.anc)
        if (events_[a].status == kAccepted) accepted.push_back(events_[a].pos);
      const double delta = local_energy(pot_, e.pos, accepted, rel_window_);
      const double p = std::exp(-beta_ * delta);  // exp(-inf) == 0
      e.status = (e.accept_u <= p) ? kAccepted : kRejected;
      stack.pop_back();
    }
  }

  /// Sorted closure of the clan: the event, its ancestors, and theirs.
  /// Empty when the event has no ancestors.
  const std::vector<std::uint32_t>& closure(std::uint32_t root) {
    if (closure_done_.size() < events_.size()) {
      closure_done_.resize(events_.size(), 0);
      closures_.resize(events_.size());
    }
    std::vector<std::uint32_t> stack{root};
    while (!stack.empty()) {
      const std::uint32_t id = stack.back();
      if (closure_done_[id]) {
        stack.pop_back();
        continue;
      }
      const Event& e = events_[id];
      bool blocked = false;
      for (std::uint32_t a : e.anc) {
        if (!closure_done_[a]) {
          stack.push_back(a);
          blocked = true;
        }
      }
      if (blocked) continue;
      std::vector<std::uint32_t> ids;
      if (!e.anc.empty()) {
        ids.push_back(id);
        for (std::uint32_t a : e.anc) {
          ids.push_back(a);
          const auto& sub = closures_[a];
          ids.insert(ids.end(), sub.begin(), sub.end());
        }
        std::sort(ids.begin(), ids.end());
        ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
      }
      closures_[id] = std::move(ids);
      closure_done_[id] = 1;
      stack.pop_back();
    }
    return closures_[root];
  }

 private:
  long coord_of(double x, int axis) const {
    return static_cast<long>(std::floor(x / cell_side_[axis]));
  }

  std::uint64_t cell_seed(const CellCoord& k) const {
    std::uint64_t s = derive_seed(seed_, kCellTag);
    for (int a = 0; a < dim(); ++a)
      s = derive_seed(s, static_cast<std::uint64_t>(k.c[a]));
    return s;
  }

  Cell& ensure_cell(const CellCoord& k) {
    auto it = cells_.find(k);
    if (it != cells_.end()) return cell_store_[it->second];
    cells_.emplace(k, cell_store_.size());
    cell_store_.emplace_back();
    Cell& cell = cell_store_.back();
    cell.rng = Rng(cell_seed(k));
    cell.frontier = 0.0;
    // Alive-at-zero piece: Poisson count, exponential ages, positive deaths.
    const long n = cell.rng.poisson(tau_ * cell_vol_);
    for (long i = 0; i < n; ++i) {
      Event e;
      e.pos = draw_position(cell.rng, k);
      e.birth = -cell.rng.exponential();
      e.death = cell.rng.exponential();
      e.accept_u = cell.rng.uniform();
      e.growth_mark = mark_draw(cell.rng, opt_.marks);
      push_event(k, std::move(e));
    }
    return cell_store_[cells_.at(k)];
  }

  Point draw_position(Rng& rng, const CellCoord& k) const {
    const int d = dim();
    Point p(d);
    for (int a = 0; a < d; ++a) {
      double base;
      if (rel_window_.boundary == Boundary::kPeriodic) {
        base = -0.5 * rel_window_.side[a] +
               static_cast<double>(k.c[a]) * cell_side_[a];
      } else {
        base = static_cast<double>(k.c[a]) * cell_side_[a];
      }
      p[a] = base + rng.uniform() * cell_side_[a];
    }
    return p;
  }

  void push_event(const CellCoord& k, Event&& e) {
    if (events_.size() >= opt_.max_events)
      throw ClanOverflow("event budget exceeded (" +
                         std::to_string(opt_.max_events) +
                         "); parameters are too close to criticality");
    events_.push_back(std::move(e));
    cell_store_[cells_.at(k)].events.push_back(
        static_cast<std::uint32_t>(events_.size() - 1));
  }

  /// Move a cell's frontier down to t, drawing the two missing pieces.
  void extend_cell(const CellCoord& k, double t) {
    Cell* cell = &cell_store_[cells_.at(k)];
    if (t >= cell->frontier) return;
    const double g = cell->frontier;
    const double f = t;
    const double span = g - f;
    Rng& rng = cell->rng;

    // Births inside [f, g) that die before g; candidates surviving past g
    // are already realized by earlier pieces and are skipped.
    const long nb = rng.poisson(tau_ * cell_vol_ * span);
    for (long i = 0; i < nb; ++i) {
      const double birth = f + span * rng.uniform();
      const double life = rng.exponential();
      if (birth + life >= g) continue;
      Event e;
      e.pos = draw_position(rng, k);
      e.birth = birth;
      e.death = birth + life;
      e.accept_u = rng.uniform();
      push_event(k, std::move(e));
      cell = &cell_store_[cells_.at(k)];
    }

    // Events born before f whose death lands in [f, g): Exp(1) age at f,
    // truncated-exponential death offset, independent by Poisson splitting.
    const double q = -std::expm1(-span);  // 1 - exp(-span)
    const long nc = rng.poisson(tau_ * cell_vol_ * q);
    for (long i = 0; i < nc; ++i) {
      Event e;
      e.pos = draw_position(rng, k);
      e.birth = f - rng.exponential();
      e.death = f - std::log1p(-rng.uniform() * q);
      e.accept_u = rng.uniform();
      push_event(k, std::move(e));
      cell = &cell_store_[cells_.at(k)];
    }
    cell->frontier = f;
  }

  /// All events alive at time t within distance r of p (relative coords).
  std::vector<std::uint32_t> alive_in_ball(const Point& p, double t, double r) {
    const int d = dim();
    if (rel_window_.boundary == Boundary::kFree) {
      double needed = 0.0;
      for (int a = 0; a < d; ++a) {
        const double half = 0.5 * rel_window_.side[a];
        needed = std::max(needed, (std::fabs(p[a]) + r) - half);
      }
      if (needed > padding_used_) {
        if (needed > max_padding_)
          throw ClanOverflow("clan exploration needs padding " +
                             std::to_string(needed) + " beyond the window cap " +
                             std::to_string(max_padding_));
        padding_used_ = needed;
      }
    }

    std::vector<long> axis_cells[kMaxDim];
    for (int a = 0; a < d; ++a) {
      if (rel_window_.boundary == Boundary::kPeriodic) {
        const long n = n_cells_[a];
        const long span = static_cast<long>(std::floor(r / cell_side_[a])) + 1;
        const double base = p[a] + 0.5 * rel_window_.side[a];
        long c0 = static_cast<long>(std::floor(base / cell_side_[a])) % n;
        if (c0 < 0) c0 += n;
        if (2 * span + 1 >= n) {
          for (long c = 0; c < n; ++c) axis_cells[a].push_back(c);
        } else {
          for (long off = -span; off <= span; ++off) {
            long c = (c0 + off) % n;
            if (c < 0) c += n;
            axis_cells[a].push_back(c);
          }
        }
      } else {
        const long clo = coord_of(p[a] - r, a);
        const long chi = coord_of(p[a] + r, a);
        for (long c = clo; c <= chi; ++c) axis_cells[a].push_back(c);
      }
    }

    std::vector<std::uint32_t> out;
    const double r2 = r * r;
    CellCoord k;
    std::size_t idx[kMaxDim] = {};
    while (true) {
      for (int a = 0; a < d; ++a) k.c[a] = axis_cells[a][idx[a]];
      ensure_cell(k);
      extend_cell(k, t);
      for (std::uint32_t id : cell_store_[cells_.at(k)].events) {
        const Event& e = events_[id];
        if (e.birth <= t && e.death > t &&
            rel_window_.distance2(p, e.pos) <= r2)
          out.push_back(id);
      }
      int a = 0;
      for (; a < d; ++a) {
        if (++idx[a] < axis_cells[a].size()) break;
        idx[a] = 0;
      }
      if (a == d) break;
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  /// Ancestors of an event: everything alive just before its birth within
  /// the interaction range. Simultaneous births (measure zero, but tests may
  /// build them) order by position.
  void enumerate_ancestors(std::uint32_t id) {
    const Point pos = events_[id].pos;
    const double birth = events_[id].birth;
    auto ids = alive_in_ball(pos, birth, range_);
    std::vector<std::uint32_t> anc;
    for (std::uint32_t y : ids) {
      if (y == id) continue;
      const Event& e = events_[y];
      if (e.birth < birth || (e.birth == birth && e.pos.lex_less(pos)))
        anc.push_back(y);
    }
    events_[id].anc = std::move(anc);
    events_[id].ancestors_done = true;
  }

  Potential pot_;
  double tau_;
  double beta_;
  SamplerOptions opt_;
  std::uint64_t seed_;
  Window rel_window_;
  double range_ = 0.0;
  double cell_side_[kMaxDim] = {};
  long n_cells_[kMaxDim] = {};
  double cell_vol_ = 0.0;
  double max_padding_ = 0.0;
  double padding_used_ = 0.0;

  std::unordered_map<CellCoord, std::size_t, CellCoordHash> cells_;
  std::deque<Cell> cell_store_;
  std::vector<Event> events_;
  std::vector<char> closure_done_;
  std::vector<std::vector<std::uint32_t>> closures_;
};

}  // namespace

PointConfiguration sample_poisson(double tau, const Window& window,
                                  std::uint64_t seed, MarkDist marks) {
  if (tau < 0.0) throw InvalidParams("intensity must be >= 0");
  PointConfiguration config;
  config.window = window;
  Rng rng(derive_seed(seed, kPointTag));
  const long n = rng.poisson(tau * window.volume());
  const int d = window.dim();
  for (long i = 0; i < n; ++i) {
    Point p(d);
    for (int a = 0; a < d; ++a)
      p[a] = rng.uniform(window.lo(a), window.hi(a));
    if (marks == MarkDist::kNone) {
      config.add(p);
    } else {
      config.add(p, mark_draw(rng, marks));
    }
  }
  return config;
}

GibbsSample sample_gibbs(const Potential& pot, double tau, double beta,
                         const Window& window, std::uint64_t seed,
                         const SamplerOptions& options) {
  if (tau < 0.0) throw InvalidParams("intensity must be >= 0");
  if (beta < 0.0) throw InvalidParams("inverse temperature must be >= 0");
  if (window.dim() < 1) throw InvalidParams("window must have dimension >= 1");
  const double margin = admissibility_margin(pot, tau, beta, window.dim());
  if (margin >= 1.0 && beta > 0.0 && !options.allow_near_critical)
    throw InvalidParams("admissibility margin " + std::to_string(margin) +
                        " >= 1; pass the near-critical override to force");

  GibbsSample sample;
  sample.margin = margin;
  sample.config.window = window;
  sample.free_config.window = window;

  BackwardProcess proc(pot, tau, beta, window, seed, options);
  const auto candidates = proc.window_candidates();
  for (std::uint32_t id : candidates) proc.resolve(id);

  std::size_t max_clan = 0;
  for (std::uint32_t id : candidates) {
    const Event& e = proc.event(id);
    const Point abs = e.pos + window.center;
    if (options.marks == MarkDist::kNone) {
      sample.free_config.add(abs);
    } else {
      sample.free_config.add(abs, e.growth_mark);
    }
    if (e.status != kAccepted) continue;
    if (options.marks == MarkDist::kNone) {
      sample.config.add(abs);
    } else {
      sample.config.add(abs, e.growth_mark);
    }
    const auto& clan = proc.closure(id);
    max_clan = std::max(max_clan, clan.size());
    std::vector<Point> pts;
    pts.reserve(clan.size());
    double diam = 0.0;
    for (std::size_t i = 0; i < clan.size(); ++i) {
      const Point& pi = proc.event(clan[i]).pos;
      for (std::size_t j = 0; j < i; ++j)
        diam = std::max(diam,
                        proc.rel_window().distance(pi, proc.event(clan[j]).pos));
      pts.push_back(pi + window.center);
    }
    sample.clan_diameter.push_back(diam);
    sample.clan_points.push_back(std::move(pts));
  }

  sample.padding_used = proc.padding_used();
  sample.max_clan_size = max_clan;
  sample.total_events = proc.total_events();
  return sample;
}

PointConfiguration sample_conditional(const Potential& pot, double tau,
                                      double beta,
                                      const PointConfiguration& full,
                                      const Window& inner,
                                      const ChainOptions& chain,
                                      std::uint64_t seed) {
  if (tau < 0.0) throw InvalidParams("intensity must be >= 0");
  const int d = inner.dim();
  std::vector<Point> inside;
  std::vector<Point> boundary;
  const double reach = pot.range();
  for (const Point& p : full.points) {
    if (inner.contains(p)) {
      inside.push_back(p);
    } else {
      // Only boundary points near the inner window can interact with it.
      bool relevant = true;
      for (int a = 0; a < d; ++a) {
        if (p[a] < inner.lo(a) - reach || p[a] > inner.hi(a) + reach) {
          relevant = false;
          break;
        }
      }
      if (relevant) boundary.push_back(p);
    }
  }

  const double vol = inner.volume();
  std::size_t moves = chain.moves_per_sweep;
  if (moves == 0) {
    moves = std::max<std::size_t>(
        64, 8 * static_cast<std::size_t>(std::ceil(tau * vol) + inside.size()));
  }

  // Energy of inserting x against current inside points plus the boundary.
  const Window& metric = full.window;
  auto insertion_energy = [&](const Point& x, long skip) {
    std::vector<Point> neigh;
    neigh.reserve(inside.size() + boundary.size());
    for (std::size_t i = 0; i < inside.size(); ++i)
      if (static_cast<long>(i) != skip) neigh.push_back(inside[i]);
    neigh.insert(neigh.end(), boundary.begin(), boundary.end());
    return local_energy(pot, x, neigh, metric);
  };

  Rng rng(derive_seed(seed, kChainTag));
  for (std::size_t sweep = 0; sweep < chain.n_sweeps; ++sweep) {
    for (std::size_t m = 0; m < moves; ++m) {
      if (rng.uniform() < 0.5) {
        Point x(d);
        for (int a = 0; a < d; ++a) x[a] = rng.uniform(inner.lo(a), inner.hi(a));
        const double delta = insertion_energy(x, -1);
        const double w = (beta == 0.0) ? 1.0 : std::exp(-beta * delta);
        const double acc =
            tau * vol / static_cast<double>(inside.size() + 1) * w;
        if (rng.uniform() < acc) inside.push_back(x);
      } else {
        if (inside.empty()) continue;
        const long i = rng.uniform_index(static_cast<long>(inside.size()));
        const double delta = insertion_energy(inside[i], i);
        const double w = (beta == 0.0) ? 1.0 : std::exp(beta * delta);
        const double acc =
            static_cast<double>(inside.size()) / (tau * vol) * w;
        if (rng.uniform() < acc) {
          inside[i] = inside.back();
          inside.pop_back();
        }
      }
    }
  }

  PointConfiguration out;
  out.window = inner;
  out.points = std::move(inside);
  return out;
}

VoidEstimate void_probability(const VoidSpec& spec, const Point& center,
                              double radius, std::size_t n_reps,
                              std::uint64_t seed,
                              const SamplerOptions& options) {
  if (radius < 0.0) throw InvalidParams("void radius must be >= 0");
  VoidEstimate est;
  est.n_reps = n_reps;
  std::size_t empty_main = 0, empty_free = 0;
  const double r2 = radius * radius;
  for (std::size_t rep = 0; rep < n_reps; ++rep) {
    const std::uint64_t s = derive_seed(seed, kVoidTag, rep);
    auto count_hits = [&](const PointConfiguration& c) {
      for (const Point& p : c.points)
        if (c.window.distance2(center, p) <= r2) return true;
      return false;
    };
    if (spec.gibbs) {
      GibbsSample g =
          sample_gibbs(spec.pot, spec.tau, spec.beta, spec.window, s, options);
      if (!count_hits(g.config)) ++empty_main;
      if (!count_hits(g.free_config)) ++empty_free;
    } else {
      PointConfiguration c = sample_poisson(spec.tau, spec.window, s);
      const bool hit = count_hits(c);
      if (!hit) {
        ++empty_main;
        ++empty_free;
      }
    }
  }
  const double n = std::max<double>(1.0, static_cast<double>(n_reps));
  est.estimate = static_cast<double>(empty_main) / n;
  est.se = binomial_se(est.estimate, n_reps);
  est.coupled_free = static_cast<double>(empty_free) / n;
  est.coupled_free_se = binomial_se(est.coupled_free, n_reps);
  return est;
}

}  // namespace gibbsgeom
