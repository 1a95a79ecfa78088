/* XDP ingress program: drop the k-th matched arrival when the loss
 * table flags rank k.  The table must be keyed by ARRIVAL rank (the
 * `satemu split` --loss-arrival output), not send order, because this
 * hook sees packets in the order the link delivered them.
 *
 * Build:
 *   clang -O2 -g -target bpf -c xdp_drop_packet.c -o xdp_drop_packet.o
 * Attach:
 *   ip link set dev DEV xdpgeneric obj xdp_drop_packet.o sec loss_bpf
 *
 * The index is consumed only after a successful lookup, so running past
 * the loaded trace fails open without desynchronizing a later reload.
 */
#include <linux/bpf.h>

#include "bpf_compat.h"
#include "flow_filter.h"
#include "trace_index.h"

#ifndef TRACE_LEN
#define TRACE_LEN 100000
#endif
#ifndef FILTER_PROTO
#define FILTER_PROTO 17 /* UDP */
#endif
#ifndef FILTER_DPORT
#define FILTER_DPORT 2112 /* 0 = any port */
#endif

struct {
    __uint(type, BPF_MAP_TYPE_ARRAY);
    __uint(max_entries, TRACE_LEN);
    __type(key, __u32);
    __type(value, __u32);
} loss_map SEC(".maps");

/* One counter for the interface, not per-CPU: see README. */
static __u32 packet_index;

SEC("loss_bpf")
int drop_packet(struct xdp_md *ctx)
{
    void *data = (void *)(long)ctx->data;
    void *data_end = (void *)(long)ctx->data_end;

    if (!flow_match(data, data_end, FILTER_PROTO, FILTER_DPORT))
        return XDP_PASS;

    __u32 key = trace_index_peek(&packet_index);
    __u32 *loss_flag = bpf_map_lookup_elem(&loss_map, &key);
    if (!loss_flag)
        return XDP_PASS;
    trace_index_advance(&packet_index, TRACE_LEN);

    return *loss_flag == 1 ? XDP_DROP : XDP_PASS;
}
