package demo.shop;

import java.util.HashMap;
import java.util.Map;
import java.util.function.Function;

public class Inventory<K extends Comparable<K>> {
    private final Map<K, Integer> stock = new HashMap<>();

    public void put(K key, int amount) {
        stock.merge(key, amount, Integer::sum);
    }

    public int total() {
        int sum = 0;
        for (int value : stock.values()) {
            sum += value;
        }
        return sum;
    }

    public <V> Map<K, V> mapValues(Function<Integer, V> fn) {
        Map<K, V> out = new HashMap<>();
        stock.forEach((k, v) -> out.put(k, fn.apply(v)));
        return out;
    }
}
