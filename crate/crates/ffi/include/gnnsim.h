#ifndef GNNSIM_H
#define GNNSIM_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum GnnsimNetworkKind {
  GNNSIM_NETWORK_KIND_GCN = 0,
  GNNSIM_NETWORK_KIND_GRAPHSAGE = 1,
  GNNSIM_NETWORK_KIND_GRAPHSAGE_POOL = 2,
} GnnsimNetworkKind;

typedef enum GnnsimOrder {
  GNNSIM_ORDER_AUTO = 0,
  GNNSIM_ORDER_SOURCE_STATIONARY = 1,
  GNNSIM_ORDER_DESTINATION_STATIONARY = 2,
} GnnsimOrder;

typedef enum GnnsimScaleKnob {
  GNNSIM_SCALE_KNOB_GRAPH_MEMORY = 0,
  GNNSIM_SCALE_KNOB_DENSE_ARRAY = 1,
  GNNSIM_SCALE_KNOB_BANDWIDTH = 2,
} GnnsimScaleKnob;

typedef enum GnnsimStatus {
  GNNSIM_STATUS_OK = 0,
  // Null pointer, bad enum value or non-UTF-8 string.
  GNNSIM_STATUS_INVALID_ARGUMENT = 1,
  GNNSIM_STATUS_IO = 2,
  // Malformed input file or config.
  GNNSIM_STATUS_PARSE = 3,
  // Inconsistent shapes, parameters or configuration.
  GNNSIM_STATUS_CONFIG = 4,
  // The workload does not fit the on-chip buffers.
  GNNSIM_STATUS_CAPACITY = 5,
  // Internal simulator error.
  GNNSIM_STATUS_INTERNAL = 6,
  GNNSIM_STATUS_PANIC = 7,
} GnnsimStatus;

typedef struct GnnsimFeatures GnnsimFeatures;

typedef struct GnnsimGraph GnnsimGraph;

typedef struct GnnsimHardware GnnsimHardware;

typedef struct GnnsimNetwork GnnsimNetwork;

typedef struct GnnsimReport GnnsimReport;

// Dataflow choice passed by value. `order` is a [`GnnsimOrder`]; zero
// means "automatic" for `nodes_per_block`; `block_size` is ignored unless
// `blocked` is set.
typedef struct GnnsimDataflow {
  bool blocked;
  size_t block_size;
  int32_t order;
  size_t nodes_per_block;
  uint64_t input_sets;
} GnnsimDataflow;

// Headline numbers of a run.
typedef struct GnnsimStats {
  uint64_t total_cycles;
  uint64_t graph_busy;
  uint64_t graph_stall;
  uint64_t dense_busy;
  uint64_t dense_stall;
  uint64_t dram_read_bytes;
  uint64_t dram_write_bytes;
  uint64_t feature_bytes;
} GnnsimStats;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null. The pointer
// stays valid until the next failing call on the same thread.
const char *gnnsim_last_error(void);

// Library version as a static string.
const char *gnnsim_version(void);

// Frees a string returned by this library.
//
// # Safety
// `s` must be null or a string returned by this library and not yet freed.
void gnnsim_string_free(char *s);

// Builds a graph from parallel arrays of edge endpoints.
//
// # Safety
// `src` and `dst` must each point to `num_edges` readable values (or be
// null when `num_edges` is 0); `out` must be writable.
enum GnnsimStatus gnnsim_graph_from_edges(size_t num_nodes,
                                          const uint32_t *src,
                                          const uint32_t *dst,
                                          size_t num_edges,
                                          struct GnnsimGraph **out);

// Loads an edge-list file.
//
// # Safety
// `path` must be a nul-terminated string; `out` must be writable.
enum GnnsimStatus gnnsim_graph_load(const char *path, size_t num_nodes, struct GnnsimGraph **out);

// Directed Erdős–Rényi graph without self-loops.
//
// # Safety
// `out` must be writable.
enum GnnsimStatus gnnsim_graph_random(size_t num_nodes,
                                      double avg_degree,
                                      uint64_t seed,
                                      struct GnnsimGraph **out);

// # Safety
// `g` must be a live graph handle.
size_t gnnsim_graph_num_nodes(const struct GnnsimGraph *g);

// # Safety
// `g` must be a live graph handle.
size_t gnnsim_graph_num_edges(const struct GnnsimGraph *g);

// # Safety
// `g` must be null or a graph handle not yet freed.
void gnnsim_graph_free(struct GnnsimGraph *g);

// Copies a row-major `num_nodes x dim` array.
//
// # Safety
// `data` must point to `num_nodes * dim` readable floats; `out` must be
// writable.
enum GnnsimStatus gnnsim_features_from_data(size_t num_nodes,
                                            size_t dim,
                                            const float *data,
                                            struct GnnsimFeatures **out);

// Loads a little-endian f32 feature file.
//
// # Safety
// `path` must be a nul-terminated string; `out` must be writable.
enum GnnsimStatus gnnsim_features_load(const char *path,
                                       size_t num_nodes,
                                       size_t dim,
                                       struct GnnsimFeatures **out);

// Uniform features in `[-1, 1)`.
//
// # Safety
// `out` must be writable.
enum GnnsimStatus gnnsim_features_random(size_t num_nodes,
                                         size_t dim,
                                         uint64_t seed,
                                         struct GnnsimFeatures **out);

// # Safety
// `f` must be null or a feature handle not yet freed.
void gnnsim_features_free(struct GnnsimFeatures *f);

// Two-layer built-in network with seeded weights; `kind` is a
// [`GnnsimNetworkKind`].
//
// # Safety
// `out` must be writable.
enum GnnsimStatus gnnsim_network_builtin(int32_t kind,
                                         size_t in_dim,
                                         size_t hidden_dim,
                                         size_t out_dim,
                                         uint64_t seed,
                                         struct GnnsimNetwork **out);

// Network from its TOML description.
//
// # Safety
// `text` must be a nul-terminated string; `out` must be writable.
enum GnnsimStatus gnnsim_network_from_toml(const char *text, struct GnnsimNetwork **out);

// # Safety
// `n` must be null or a network handle not yet freed.
void gnnsim_network_free(struct GnnsimNetwork *n);

// # Safety
// `out` must be writable.
enum GnnsimStatus gnnsim_hardware_default(struct GnnsimHardware **out);

// Hardware from TOML with `dense`, `graph` and `memory` sections; missing
// keys keep their defaults.
//
// # Safety
// `text` must be a nul-terminated string; `out` must be writable.
enum GnnsimStatus gnnsim_hardware_from_toml(const char *text, struct GnnsimHardware **out);

// Doubles one resource in place; `knob` is a [`GnnsimScaleKnob`].
//
// # Safety
// `hw` must be a live hardware handle.
enum GnnsimStatus gnnsim_hardware_scale(struct GnnsimHardware *hw, int32_t knob);

// # Safety
// `hw` must be null or a hardware handle not yet freed.
void gnnsim_hardware_free(struct GnnsimHardware *hw);

// Conventional, automatic order and block size, one input set.
struct GnnsimDataflow gnnsim_dataflow_default(void);

// Simulates `network` over the graph. With `functional` false feature
// values are skipped; cycles and traffic are unchanged.
//
// # Safety
// All handles must be live; `df` must point to a valid struct; `out`
// must be writable.
enum GnnsimStatus gnnsim_run(const struct GnnsimGraph *graph,
                             const struct GnnsimFeatures *features,
                             const struct GnnsimNetwork *network,
                             const struct GnnsimHardware *hardware,
                             const struct GnnsimDataflow *df,
                             bool functional,
                             struct GnnsimReport **out);

// # Safety
// `report` must be a live report handle and `out` writable.
enum GnnsimStatus gnnsim_report_stats(const struct GnnsimReport *report, struct GnnsimStats *out);

// Shape of the final-layer features; `0 x 0` for timing-only runs.
//
// # Safety
// `report` must be a live report handle; `rows` and `cols` writable.
enum GnnsimStatus gnnsim_report_output_shape(const struct GnnsimReport *report,
                                             size_t *rows,
                                             size_t *cols);

// Copies the row-major output into `buf`, which must hold exactly
// rows x cols floats.
//
// # Safety
// `report` must be a live report handle; `buf` must point to `len`
// writable floats.
enum GnnsimStatus gnnsim_report_copy_output(const struct GnnsimReport *report,
                                            float *buf,
                                            size_t len);

// `key=value` summary; free with [`gnnsim_string_free`]. Null on failure.
//
// # Safety
// `report` must be a live report handle.
char *gnnsim_report_summary(const struct GnnsimReport *report);

// Hex SHA-256 of the output; free with [`gnnsim_string_free`].
//
// # Safety
// `report` must be a live report handle.
char *gnnsim_report_output_hash(const struct GnnsimReport *report);

// # Safety
// `report` must be null or a report handle not yet freed.
void gnnsim_report_free(struct GnnsimReport *report);

// Closed-form shard-set reads and writes for one sweep of an S x S grid;
// `order` is a [`GnnsimOrder`], where auto picks the cheaper one.
//
// # Safety
// `reads` and `writes` must be writable.
enum GnnsimStatus gnnsim_cost(int32_t order,
                              uint64_t shards,
                              uint64_t input_sets,
                              uint64_t *reads,
                              uint64_t *writes);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GNNSIM_H */
