#include "topoopt/matching.hpp"

#include <algorithm>
#include <cassert>
#include <deque>
#include <limits>

#include "topoopt/error.hpp"

namespace topoopt {

namespace {

// Primal-dual blossom matcher, classic O(n^3) stage structure: repeatedly
// grow an alternating forest from free vertices, shrink odd cycles into
// blossoms, and adjust dual variables until no augmenting path improves the
// total weight. Vertex ids 0..n-1, blossom ids n..2n-1.
class BlossomMatcher {
 public:
  BlossomMatcher(int n, const std::vector<int>& ei, const std::vector<int>& ej,
                 const std::vector<double>& ew)
      : nvertex_(n),
        edge_i_(ei),
        edge_j_(ej),
        weight_(ew),
        nedge_(static_cast<int>(ew.size())) {
    max_weight_ = 0.0;
    for (double w : weight_) max_weight_ = std::max(max_weight_, w);
    endpoint_.resize(2 * nedge_);
    for (int k = 0; k < nedge_; ++k) {
      endpoint_[2 * k] = edge_i_[k];
      endpoint_[2 * k + 1] = edge_j_[k];
    }
    neighbend_.assign(nvertex_, {});
    for (int k = 0; k < nedge_; ++k) {
      neighbend_[edge_i_[k]].push_back(2 * k + 1);
      neighbend_[edge_j_[k]].push_back(2 * k);
    }
    mate_.assign(nvertex_, -1);
    label_.assign(2 * nvertex_, 0);
    labelend_.assign(2 * nvertex_, -1);
    inblossom_.resize(nvertex_);
    for (int v = 0; v < nvertex_; ++v) inblossom_[v] = v;
    blossomparent_.assign(2 * nvertex_, -1);
    blossomchilds_.assign(2 * nvertex_, {});
    blossombase_.resize(2 * nvertex_);
    for (int v = 0; v < nvertex_; ++v) blossombase_[v] = v;
    for (int b = nvertex_; b < 2 * nvertex_; ++b) blossombase_[b] = -1;
    blossomendps_.assign(2 * nvertex_, {});
    bestedge_.assign(2 * nvertex_, -1);
    blossombestedges_.assign(2 * nvertex_, {});
    for (int b = 2 * nvertex_ - 1; b >= nvertex_; --b) unusedblossoms_.push_back(b);
    dualvar_.assign(2 * nvertex_, 0.0);
    for (int v = 0; v < nvertex_; ++v) dualvar_[v] = max_weight_;
    allowedge_.assign(nedge_, false);
  }

  std::vector<int> run() {
    for (int t = 0; t < nvertex_; ++t) {
      std::fill(label_.begin(), label_.end(), 0);
      std::fill(bestedge_.begin(), bestedge_.end(), -1);
      for (int b = nvertex_; b < 2 * nvertex_; ++b) blossombestedges_[b].clear();
      std::fill(allowedge_.begin(), allowedge_.end(), false);
      queue_.clear();

      for (int v = 0; v < nvertex_; ++v) {
        if (mate_[v] == -1 && label_[inblossom_[v]] == 0) assign_label(v, 1, -1);
      }

      bool augmented = false;
      for (;;) {
        while (!queue_.empty() && !augmented) {
          int v = queue_.back();
          queue_.pop_back();
          assert(label_[inblossom_[v]] == 1);
          for (int p : neighbend_[v]) {
            int k = p / 2;
            int w = endpoint_[p];
            if (inblossom_[v] == inblossom_[w]) continue;
            double kslack = 0.0;
            if (!allowedge_[k]) {
              kslack = slack(k);
              if (kslack <= kTol) allowedge_[k] = true;
            }
            if (allowedge_[k]) {
              if (label_[inblossom_[w]] == 0) {
                assign_label(w, 2, p ^ 1);
              } else if (label_[inblossom_[w]] == 1) {
                int base = scan_blossom(v, w);
                if (base >= 0) {
                  add_blossom(base, k);
                } else {
                  augment_matching(k);
                  augmented = true;
                  break;
                }
              } else if (label_[w] == 0) {
                assert(label_[inblossom_[w]] == 2);
                label_[w] = 2;
                labelend_[w] = p ^ 1;
              }
            } else if (label_[inblossom_[w]] == 1) {
              int b = inblossom_[v];
              if (bestedge_[b] == -1 || kslack < slack(bestedge_[b])) bestedge_[b] = k;
            } else if (label_[w] == 0) {
              if (bestedge_[w] == -1 || kslack < slack(bestedge_[w])) bestedge_[w] = k;
            }
          }
          if (augmented) break;
        }
        if (augmented) break;

        // Dual adjustment.
        int deltatype = -1;
        double delta = 0.0;
        int deltaedge = -1;
        int deltablossom = -1;

        deltatype = 1;
        delta = *std::min_element(dualvar_.begin(), dualvar_.begin() + nvertex_);

        for (int v = 0; v < nvertex_; ++v) {
          if (label_[inblossom_[v]] == 0 && bestedge_[v] != -1) {
            double d = slack(bestedge_[v]);
            if (deltatype == -1 || d < delta) {
              delta = d;
              deltatype = 2;
              deltaedge = bestedge_[v];
            }
          }
        }
        for (int b = 0; b < 2 * nvertex_; ++b) {
          if (blossomparent_[b] == -1 && label_[b] == 1 && bestedge_[b] != -1) {
            double d = slack(bestedge_[b]) / 2.0;
            if (deltatype == -1 || d < delta) {
              delta = d;
              deltatype = 3;
              deltaedge = bestedge_[b];
            }
          }
        }
        for (int b = nvertex_; b < 2 * nvertex_; ++b) {
          if (blossombase_[b] >= 0 && blossomparent_[b] == -1 && label_[b] == 2 &&
              (deltatype == -1 || dualvar_[b] < delta)) {
            delta = dualvar_[b];
            deltatype = 4;
            deltablossom = b;
          }
        }

        for (int v = 0; v < nvertex_; ++v) {
          if (label_[inblossom_[v]] == 1) {
            dualvar_[v] -= delta;
          } else if (label_[inblossom_[v]] == 2) {
            dualvar_[v] += delta;
          }
        }
        for (int b = nvertex_; b < 2 * nvertex_; ++b) {
          if (blossombase_[b] >= 0 && blossomparent_[b] == -1) {
            if (label_[b] == 1) {
              dualvar_[b] += delta;
            } else if (label_[b] == 2) {
              dualvar_[b] -= delta;
            }
          }
        }

        if (deltatype == 1) break;
        if (deltatype == 2) {
          allowedge_[deltaedge] = true;
          int i = edge_i_[deltaedge];
          if (label_[inblossom_[i]] == 0) i = edge_j_[deltaedge];
          assert(label_[inblossom_[i]] == 1);
          queue_.push_back(i);
        } else if (deltatype == 3) {
          allowedge_[deltaedge] = true;
          int i = edge_i_[deltaedge];
          assert(label_[inblossom_[i]] == 1);
          queue_.push_back(i);
        } else if (deltatype == 4) {
          expand_blossom(deltablossom, false);
        }
      }

      if (!augmented) break;

      for (int b = nvertex_; b < 2 * nvertex_; ++b) {
        if (blossomparent_[b] == -1 && blossombase_[b] >= 0 && label_[b] == 1 &&
            dualvar_[b] <= kTol) {
          expand_blossom(b, true);
        }
      }
    }
    return mate_;
  }

  int endpoint_vertex(int p) const { return endpoint_[p]; }

 private:
  static constexpr double kTol = 1e-12;

  double slack(int k) const {
    return dualvar_[edge_i_[k]] + dualvar_[edge_j_[k]] - 2.0 * weight_[k];
  }

  void blossom_leaves(int b, std::vector<int>* out) const {
    if (b < nvertex_) {
      out->push_back(b);
      return;
    }
    for (int t : blossomchilds_[b]) blossom_leaves(t, out);
  }

  void assign_label(int w, int t, int p) {
    int b = inblossom_[w];
    assert(label_[w] == 0 && label_[b] == 0);
    label_[w] = label_[b] = t;
    labelend_[w] = labelend_[b] = p;
    bestedge_[w] = bestedge_[b] = -1;
    if (t == 1) {
      std::vector<int> leaves;
      blossom_leaves(b, &leaves);
      for (int v : leaves) queue_.push_back(v);
    } else {
      int base = blossombase_[b];
      assert(mate_[base] >= 0);
      assign_label(endpoint_[mate_[base]], 1, mate_[base] ^ 1);
    }
  }

  int scan_blossom(int v, int w) {
    std::vector<int> path;
    int base = -1;
    while (v != -1 || w != -1) {
      int b = inblossom_[v];
      if (label_[b] & 4) {
        base = blossombase_[b];
        break;
      }
      assert(label_[b] == 1);
      path.push_back(b);
      label_[b] = 5;
      assert(labelend_[b] == mate_[blossombase_[b]]);
      if (labelend_[b] == -1) {
        v = -1;
      } else {
        v = endpoint_[labelend_[b]];
        b = inblossom_[v];
        assert(label_[b] == 2);
        assert(labelend_[b] >= 0);
        v = endpoint_[labelend_[b]];
      }
      if (w != -1) std::swap(v, w);
    }
    for (int b : path) label_[b] = 1;
    return base;
  }

  void add_blossom(int base, int k) {
    int v = edge_i_[k];
    int w = edge_j_[k];
    int bb = inblossom_[base];
    int bv = inblossom_[v];
    int bw = inblossom_[w];
    int b = unusedblossoms_.back();
    unusedblossoms_.pop_back();
    blossombase_[b] = base;
    blossomparent_[b] = -1;
    blossomparent_[bb] = b;
    std::vector<int> path;
    std::vector<int> endps;
    while (bv != bb) {
      blossomparent_[bv] = b;
      path.push_back(bv);
      endps.push_back(labelend_[bv]);
      assert(label_[bv] == 2 || (label_[bv] == 1 && labelend_[bv] == mate_[blossombase_[bv]]));
      assert(labelend_[bv] >= 0);
      v = endpoint_[labelend_[bv]];
      bv = inblossom_[v];
    }
    path.push_back(bb);
    std::reverse(path.begin(), path.end());
    std::reverse(endps.begin(), endps.end());
    endps.push_back(2 * k);
    while (bw != bb) {
      blossomparent_[bw] = b;
      path.push_back(bw);
      endps.push_back(labelend_[bw] ^ 1);
      assert(label_[bw] == 2 || (label_[bw] == 1 && labelend_[bw] == mate_[blossombase_[bw]]));
      assert(labelend_[bw] >= 0);
      w = endpoint_[labelend_[bw]];
      bw = inblossom_[w];
    }
    blossomchilds_[b] = path;
    blossomendps_[b] = endps;
    label_[b] = 1;
    labelend_[b] = labelend_[bb];
    dualvar_[b] = 0.0;
    std::vector<int> leaves;
    blossom_leaves(b, &leaves);
    for (int lv : leaves) {
      if (label_[inblossom_[lv]] == 2) queue_.push_back(lv);
      inblossom_[lv] = b;
    }
    // Least-slack edges leaving the new blossom.
    std::vector<int> bestedgeto(2 * nvertex_, -1);
    for (int bvv : path) {
      std::vector<int> nblists;
      if (bvv < nvertex_) {
        for (int p : neighbend_[bvv]) nblists.push_back(p / 2);
      } else if (!blossombestedges_[bvv].empty()) {
        nblists = blossombestedges_[bvv];
      } else {
        std::vector<int> lv2;
        blossom_leaves(bvv, &lv2);
        for (int u : lv2)
          for (int p : neighbend_[u]) nblists.push_back(p / 2);
      }
      for (int kk : nblists) {
        int j = edge_j_[kk];
        if (inblossom_[j] == b) j = edge_i_[kk];
        int bj = inblossom_[j];
        if (bj != b && label_[bj] == 1 &&
            (bestedgeto[bj] == -1 || slack(kk) < slack(bestedgeto[bj]))) {
          bestedgeto[bj] = kk;
        }
      }
      blossombestedges_[bvv].clear();
      bestedge_[bvv] = -1;
    }
    blossombestedges_[b].clear();
    for (int kk : bestedgeto)
      if (kk != -1) blossombestedges_[b].push_back(kk);
    bestedge_[b] = -1;
    for (int kk : blossombestedges_[b])
      if (bestedge_[b] == -1 || slack(kk) < slack(bestedge_[b])) bestedge_[b] = kk;
  }

  void expand_blossom(int b, bool endstage) {
    for (int s : blossomchilds_[b]) {
      blossomparent_[s] = -1;
      if (s < nvertex_) {
        inblossom_[s] = s;
      } else if (endstage && dualvar_[s] <= kTol) {
        expand_blossom(s, endstage);
      } else {
        std::vector<int> leaves;
        blossom_leaves(s, &leaves);
        for (int v : leaves) inblossom_[v] = s;
      }
    }
    if (!endstage && label_[b] == 2) {
      assert(labelend_[b] >= 0);
      int entrychild = inblossom_[endpoint_[labelend_[b] ^ 1]];
      int j = static_cast<int>(std::find(blossomchilds_[b].begin(), blossomchilds_[b].end(),
                                         entrychild) -
                               blossomchilds_[b].begin());
      int jstep, endptrick;
      if (j & 1) {
        j -= static_cast<int>(blossomchilds_[b].size());
        jstep = 1;
        endptrick = 0;
      } else {
        jstep = -1;
        endptrick = 1;
      }
      int p = labelend_[b];
      while (j != 0) {
        label_[endpoint_[p ^ 1]] = 0;
        int idx = mod_index(j - endptrick, blossomchilds_[b].size());
        label_[endpoint_[blossomendps_[b][idx] ^ endptrick ^ 1]] = 0;
        assign_label(endpoint_[p ^ 1], 2, p);
        allowedge_[blossomendps_[b][idx] / 2] = true;
        j += jstep;
        idx = mod_index(j - endptrick, blossomchilds_[b].size());
        p = blossomendps_[b][idx] ^ endptrick;
        allowedge_[p / 2] = true;
        j += jstep;
      }
      int bv = blossomchilds_[b][mod_index(j, blossomchilds_[b].size())];
      label_[endpoint_[p ^ 1]] = label_[bv] = 2;
      labelend_[endpoint_[p ^ 1]] = labelend_[bv] = p;
      bestedge_[bv] = -1;
      j += jstep;
      while (blossomchilds_[b][mod_index(j, blossomchilds_[b].size())] != entrychild) {
        bv = blossomchilds_[b][mod_index(j, blossomchilds_[b].size())];
        if (label_[bv] == 1) {
          j += jstep;
          continue;
        }
        std::vector<int> leaves;
        blossom_leaves(bv, &leaves);
        int v = -1;
        for (int lv : leaves) {
          if (label_[lv] != 0) {
            v = lv;
            break;
          }
        }
        if (v != -1) {
          assert(label_[v] == 2);
          assert(inblossom_[v] == bv);
          label_[v] = 0;
          label_[endpoint_[mate_[blossombase_[bv]]]] = 0;
          assign_label(v, 2, labelend_[v]);
        }
        j += jstep;
      }
    }
    label_[b] = -1;
    labelend_[b] = -1;
    blossomchilds_[b].clear();
    blossomendps_[b].clear();
    blossombase_[b] = -1;
    blossombestedges_[b].clear();
    bestedge_[b] = -1;
    unusedblossoms_.push_back(b);
  }

  void augment_blossom(int b, int v) {
    int t = v;
    while (blossomparent_[t] != b) t = blossomparent_[t];
    if (t >= nvertex_) augment_blossom(t, v);
    int i = static_cast<int>(std::find(blossomchilds_[b].begin(), blossomchilds_[b].end(), t) -
                             blossomchilds_[b].begin());
    int j = i;
    int jstep, endptrick;
    if (i & 1) {
      j -= static_cast<int>(blossomchilds_[b].size());
      jstep = 1;
      endptrick = 0;
    } else {
      jstep = -1;
      endptrick = 1;
    }
    while (j != 0) {
      j += jstep;
      int tt = blossomchilds_[b][mod_index(j, blossomchilds_[b].size())];
      int p = blossomendps_[b][mod_index(j - endptrick, blossomchilds_[b].size())] ^ endptrick;
      if (tt >= nvertex_) augment_blossom(tt, endpoint_[p]);
      j += jstep;
      tt = blossomchilds_[b][mod_index(j, blossomchilds_[b].size())];
      if (tt >= nvertex_) augment_blossom(tt, endpoint_[p ^ 1]);
      mate_[endpoint_[p]] = p ^ 1;
      mate_[endpoint_[p ^ 1]] = p;
    }
    std::rotate(blossomchilds_[b].begin(), blossomchilds_[b].begin() + mod_index(i, blossomchilds_[b].size()),
                blossomchilds_[b].end());
    std::rotate(blossomendps_[b].begin(), blossomendps_[b].begin() + mod_index(i, blossomendps_[b].size()),
                blossomendps_[b].end());
    blossombase_[b] = blossombase_[blossomchilds_[b][0]];
    assert(blossombase_[b] == v);
  }

  void augment_matching(int k) {
    int v = edge_i_[k];
    int w = edge_j_[k];
    for (auto [s, p] : {std::pair<int, int>{v, 2 * k + 1}, std::pair<int, int>{w, 2 * k}}) {
      for (;;) {
        int bs = inblossom_[s];
        assert(label_[bs] == 1);
        assert(labelend_[bs] == mate_[blossombase_[bs]]);
        if (bs >= nvertex_) augment_blossom(bs, s);
        mate_[s] = p;
        if (labelend_[bs] == -1) break;
        int t = endpoint_[labelend_[bs]];
        int bt = inblossom_[t];
        assert(label_[bt] == 2);
        assert(labelend_[bt] >= 0);
        s = endpoint_[labelend_[bt]];
        int j = endpoint_[labelend_[bt] ^ 1];
        assert(blossombase_[bt] == t);
        if (bt >= nvertex_) augment_blossom(bt, j);
        mate_[j] = labelend_[bt];
        p = labelend_[bt] ^ 1;
      }
    }
  }

  static int mod_index(long long j, size_t size) {
    long long m = static_cast<long long>(size);
    return static_cast<int>(((j % m) + m) % m);
  }

  int nvertex_;
  std::vector<int> edge_i_, edge_j_;
  std::vector<double> weight_;
  int nedge_;
  double max_weight_;
  std::vector<int> endpoint_;
  std::vector<std::vector<int>> neighbend_;
  std::vector<int> mate_;
  std::vector<int> label_;
  std::vector<int> labelend_;
  std::vector<int> inblossom_;
  std::vector<int> blossomparent_;
  std::vector<std::vector<int>> blossomchilds_;
  std::vector<int> blossombase_;
  std::vector<std::vector<int>> blossomendps_;
  std::vector<int> bestedge_;
  std::vector<std::vector<int>> blossombestedges_;
  std::vector<int> unusedblossoms_;
  std::vector<double> dualvar_;
  std::vector<bool> allowedge_;
  std::deque<int> queue_;
};

}  // namespace

namespace {

// Optimal total over the vertices not marked excluded.
double solve_total(const std::vector<std::vector<double>>& weights,
                   const std::vector<bool>& excluded) {
  const int n = static_cast<int>(weights.size());
  std::vector<int> index(n, -1);
  std::vector<int> nodes;
  for (int v = 0; v < n; ++v) {
    if (!excluded[v]) {
      index[v] = static_cast<int>(nodes.size());
      nodes.push_back(v);
    }
  }
  std::vector<int> ei, ej;
  std::vector<double> ew;
  for (size_t a = 0; a < nodes.size(); ++a) {
    for (size_t b = a + 1; b < nodes.size(); ++b) {
      const double w = weights[nodes[a]][nodes[b]];
      if (w > 0.0) {
        ei.push_back(static_cast<int>(a));
        ej.push_back(static_cast<int>(b));
        ew.push_back(w);
      }
    }
  }
  if (ew.empty()) return 0.0;
  BlossomMatcher matcher(static_cast<int>(nodes.size()), ei, ej, ew);
  std::vector<int> mate = matcher.run();
  double total = 0.0;
  for (size_t a = 0; a < nodes.size(); ++a) {
    if (mate[a] >= 0) {
      const int partner = matcher.endpoint_vertex(mate[a]);
      if (static_cast<int>(a) < partner) total += ew[mate[a] / 2];
    }
  }
  return total;
}

}  // namespace

std::vector<std::pair<int, int>> max_weight_matching(
    const std::vector<std::vector<double>>& weights) {
  const int n = static_cast<int>(weights.size());
  bool any = false;
  for (int i = 0; i < n; ++i) {
    require(static_cast<int>(weights[i].size()) == n, "max_weight_matching: matrix not square");
    require(weights[i][i] == 0.0, "max_weight_matching: diagonal must be zero");
    for (int j = i + 1; j < n; ++j) {
      require(weights[i][j] == weights[j][i], "max_weight_matching: matrix not symmetric");
      require(weights[i][j] >= 0.0, "max_weight_matching: negative weight");
      any = any || weights[i][j] > 0.0;
    }
  }
  if (!any) return {};

  std::vector<bool> excluded(n, false);
  const double optimum = solve_total(weights, excluded);
  const double tol = 1e-9 * std::max(1.0, optimum);

  // Canonical optimal matching: walk vertices in order and keep the smallest
  // partner that still allows the remaining graph to reach the optimum. A
  // vertex with no such partner is unmatched in every optimal matching.
  std::vector<std::pair<int, int>> out;
  double fixed_weight = 0.0;
  for (int v = 0; v < n; ++v) {
    if (excluded[v]) continue;
    excluded[v] = true;
    for (int j = 0; j < n; ++j) {
      if (j == v || excluded[j] || weights[v][j] <= 0.0) continue;
      excluded[j] = true;
      const double rest = solve_total(weights, excluded);
      if (fixed_weight + weights[v][j] + rest >= optimum - tol) {
        fixed_weight += weights[v][j];
        out.emplace_back(v, j);
        break;
      }
      excluded[j] = false;
    }
    if (out.empty() || out.back().first != v) excluded[v] = false;
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace topoopt
