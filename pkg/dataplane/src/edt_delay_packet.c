/* TC egress program: stamp each matched packet's earliest departure time
 * from the delay table, then let the fq root qdisc hold it until then.
 *
 * Build:
 *   clang -O2 -g -target bpf -c edt_delay_packet.c -o edt_delay_packet.o
 * Attach:
 *   tc qdisc add dev DEV clsact
 *   tc filter add dev DEV egress bpf direct-action obj edt_delay_packet.o sec delay_ebpf
 *   tc qdisc add dev DEV root fq
 *
 * delay_map holds one u32 delay (ns) per trace slot; populate it with
 * the scripts `satemu maps` writes.  Missing entries fail open: the
 * packet leaves immediately rather than stalling the interface.
 */
#include <linux/bpf.h>
#include <linux/pkt_cls.h>

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
} delay_map SEC(".maps");

/* One counter for the interface, not per-CPU: see README. */
static __u32 packet_index;

SEC("delay_ebpf")
int delay_packet(struct __sk_buff *skb)
{
    void *data = (void *)(long)skb->data;
    void *data_end = (void *)(long)skb->data_end;

    if (!flow_match(data, data_end, FILTER_PROTO, FILTER_DPORT))
        return TC_ACT_OK;

    __u32 key = trace_index_consume(&packet_index, TRACE_LEN);
    __u32 *delay_ns = bpf_map_lookup_elem(&delay_map, &key);
    if (!delay_ns)
        return TC_ACT_OK;

    skb->tstamp = bpf_ktime_get_ns() + (__u64)*delay_ns;
    return TC_ACT_OK;
}
