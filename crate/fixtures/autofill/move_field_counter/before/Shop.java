public class Shop {
    int count;

    void add() {
        count++;
        log("count changed");
    }

    void reset() {
        // count goes back to zero
        count = 0;
    }

    int report() {
        return count * 2;
    }

    void log(String message) {
        System.out.println(message);
    }
}
