#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "cogsl/error.hpp"
#include "cogsl/graph.hpp"
#include "test_util.hpp"

using namespace cogsl;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("cogsl_graph_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

fs::path tiny_dataset(const std::string& name, const std::string& edges) {
  auto dir = scratch(name);
  write(dir / "features.csv", "1,0\n0,1\n0.5,0.5\n0.25,2\n");
  write(dir / "labels.csv", "0\n1\n0\n1\n");
  write(dir / "edges.csv", edges);
  write(dir / "splits.json", R"({"train":[0,1],"val":[2],"test":[3]})");
  return dir;
}

}  // namespace

TEST(Graph, CanonicalisesEdges) {
  Graph g(Tensor(4, 1), {0, 1, 0, 1}, {{1, 0}, {0, 1}, {2, 2}, {3, 2}}, {{{0, 1}, {2}, {3}}});
  ASSERT_EQ(g.n_edges(), 2u);
  EXPECT_EQ(g.edges()[0], Edge(0, 1));
  EXPECT_EQ(g.edges()[1], Edge(2, 3));
  EXPECT_EQ(g.dropped_self_loops(), 1u);
  EXPECT_EQ(g.dropped_duplicates(), 1u);
}

TEST(Graph, SingleNodeReport) {
  Graph g(Tensor(1, 2), {0}, {}, {{{0}, {}, {}}});
  auto rep = validate(g);
  EXPECT_EQ(rep.counts[0], 1u);
  EXPECT_EQ(rep.counts[1], 0u);
  EXPECT_EQ(rep.counts[2], 0u);
}

TEST(Graph, OverlappingSplitsNameTheIndex) {
  try {
    Graph g(Tensor(3, 1), {0, 1, 0}, {}, {{{0, 1}, {1, 2}, {}}});
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("index 1 in train and val"), std::string::npos) << e.what();
  }
}

TEST(Graph, NonContiguousLabelsRejected) {
  EXPECT_THROW(Graph(Tensor(3, 1), {0, 2, 0}, {}, {{{0}, {1}, {2}}}), ValidationError);
}

TEST(Graph, SplitFilteredAccessor) {
  auto g = test::make_graph(8, test::path_edges(8));
  auto tr = g.labeled(Split::train);
  ASSERT_EQ(tr.nodes.size(), tr.labels.size());
  for (std::size_t k = 0; k < tr.nodes.size(); ++k) EXPECT_EQ(tr.labels[k], g.all_labels()[tr.nodes[k]]);
}

TEST(GraphIo, LoadDropsSelfLoopsAndSymmetrises) {
  auto dir = tiny_dataset("loops", "0,1\n1,0\n2,2\n2,3\n");
  auto g = load_dataset(dir);
  EXPECT_EQ(g.n_nodes(), 4u);
  EXPECT_EQ(g.n_features(), 2u);
  EXPECT_EQ(g.n_classes(), 2u);
  EXPECT_EQ(g.n_edges(), 2u);
}

TEST(GraphIo, EmptyEdgesAllowed) {
  auto g = load_dataset(tiny_dataset("empty", ""));
  EXPECT_EQ(g.n_edges(), 0u);
}

TEST(GraphIo, MissingFileNamesTheFile) {
  auto dir = tiny_dataset("missing", "0,1\n");
  fs::remove(dir / "labels.csv");
  try {
    load_dataset(dir);
    FAIL();
  } catch (const LoadError& e) {
    EXPECT_NE(std::string(e.what()).find("labels.csv"), std::string::npos);
  }
}

TEST(GraphIo, OutOfRangeEdgeNamesTheRow) {
  auto dir = tiny_dataset("range", "0,1\n1,9\n");
  try {
    load_dataset(dir);
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("row 1"), std::string::npos) << e.what();
  }
}

TEST(GraphIo, RoundTripIsBitExactAndIdempotent) {
  auto src = test::make_graph(30, test::random_edges(30, 0.2, 5), 4, 3, 9);
  auto dir = scratch("roundtrip");
  save_dataset(src, dir);
  auto a = load_dataset(dir);
  EXPECT_EQ(a.features(), src.features());
  EXPECT_EQ(a.edges(), src.edges());
  EXPECT_EQ(a.all_labels(), src.all_labels());
  auto dir2 = scratch("roundtrip2");
  save_dataset(a, dir2);
  auto b = load_dataset(dir2);
  EXPECT_EQ(b.edges(), a.edges());
  EXPECT_EQ(b.features(), a.features());
  for (auto s : {Split::train, Split::val, Split::test}) EXPECT_EQ(b.split(s), src.split(s));
}

TEST(GraphIo, WineShape) {
  fs::path dir = fs::path(COGSL_SOURCE_DIR) / "data" / "wine";
  if (!fs::exists(dir / "features.csv")) GTEST_SKIP() << "wine export not present";
  auto g = load_dataset(dir);
  EXPECT_EQ(g.n_nodes(), 178u);
  EXPECT_EQ(g.n_features(), 13u);
  EXPECT_EQ(g.n_classes(), 3u);
  auto rep = validate(g);
  EXPECT_EQ(rep.counts[0], 10u);
  EXPECT_EQ(rep.counts[1], 20u);
  EXPECT_EQ(rep.counts[2], 148u);
}

TEST(Graph, AdjacencyAndSupportEdges) {
  auto e = test::path_edges(4);
  auto a = adjacency_matrix(4, e);
  EXPECT_EQ(a.nnz(), 6u);
  EXPECT_EQ(support_edges(a), e);
}
