/* Probe-flow classifier shared by both data-plane programs and the host
 * test build.  A packet matches when it is IPv4, carries the configured
 * transport protocol, and (unless the port is 0) is addressed to the
 * configured destination port.  Every header read is bounds-checked
 * against data_end, which is what the in-kernel verifier demands and
 * what keeps the host tests honest on truncated frames. */
#ifndef FLOW_FILTER_H
#define FLOW_FILTER_H

#include <linux/types.h>
#include <linux/if_ether.h>
#include <linux/ip.h>
#include <linux/udp.h>

#ifndef __always_inline
#define __always_inline inline __attribute__((always_inline))
#endif

#ifndef bpf_htons
#if __BYTE_ORDER__ == __ORDER_LITTLE_ENDIAN__
#define bpf_htons(x) ((__u16)__builtin_bswap16((__u16)(x)))
#else
#define bpf_htons(x) ((__u16)(x))
#endif
#endif

static __always_inline int flow_match(const void *data, const void *data_end,
                                      __u8 proto, __u16 dport)
{
    const struct ethhdr *eth = data;
    if ((const void *)(eth + 1) > data_end)
        return 0;
    if (eth->h_proto != bpf_htons(ETH_P_IP))
        return 0;

    const struct iphdr *ip = (const void *)(eth + 1);
    if ((const void *)(ip + 1) > data_end)
        return 0;
    if (ip->version != 4)
        return 0;
    if (ip->protocol != proto)
        return 0;
    /* only first fragments carry the transport header */
    if (ip->frag_off & bpf_htons(0x1FFF))
        return 0;

    __u32 ihl_bytes = ip->ihl * 4;
    if (ihl_bytes < sizeof(struct iphdr))
        return 0;
    if (dport == 0)
        return 1; /* wildcard port: protocol match suffices */

    /* UDP and TCP both keep the destination port at offset 2 */
    const struct udphdr *l4 = (const void *)((const char *)ip + ihl_bytes);
    if ((const void *)(l4 + 1) > data_end)
        return 0;
    return l4->dest == bpf_htons(dport);
}

#endif /* FLOW_FILTER_H */
